"""Break each construction on purpose and watch the checker catch it.

The packing mold loses one cell, which opens a gap the cavity does not
account for.  The n-tris chute is made one garbage bar too shallow, so the
last out-of-phase turn has nowhere to go.

    python3 demos/negative_controls.py
"""

from polycube_games import Graph
from polycube_games.ntris_reduce import compile_ntris, verify_tetris_reduction
from polycube_games.pack_reduce import compile_packing, corrupt_mold, verify_pack_reduction


def show(title, rep):
    print(title)
    for c in rep.checks:
        if not c.passed:
            print("  " + c.line())
    print(f"  -> {'all checks pass' if rep.ok else 'rejected'}")
    print()


def main():
    g = Graph.from_edges(2, [(1, 2)])
    show("packing, intact mold:", verify_pack_reduction(g))
    show("packing, mold missing cell (0,0,0):", verify_pack_reduction(artifacts=corrupt_mold(compile_packing(g))))
    L = compile_ntris(g).L
    show("n-tris, chute one bar short:",
         verify_tetris_reduction(artifacts=compile_ntris(g, chute_shortfall=L), plane_clearing=False))


if __name__ == "__main__":
    main()
