"""Replay a perfect-play n-tris game built from the single-edge graph.

Every drop of the principal variation is labelled with the cavity it fell
into, so the phase structure is visible: in each phase one vertex piece
goes to the contest region, the rest to that phase's dump, and the player
out of phase throws garbage down the chute.

    python3 demos/ntris_phases.py
"""

from polycube_games import Graph, KaylesPosition, KaylesSolver
from polycube_games.ntris import TetrisSolver, _apply_raw, orientations
from polycube_games.ntris_reduce import compile_ntris


def where(mask, regions):
    for name, region in regions.items():
        if not mask & ~region:
            return name
    return "elsewhere"


def main():
    g = Graph.from_edges(2, [(1, 2)])
    art = compile_ntris(g)
    print(f"cube side {art.side}, L = {art.L}, main chute depth {art.chute_depth} "
          f"(L*n(n-1) would be {art.shallow_chute_depth})")
    print(f"padded edge columns m = {art.padded.m}; sequence of {len(art.sequence)} pieces:")
    print("  " + " ".join(art.labels()))
    print()

    s = art.state()
    solver = TetrisSolver()
    wins = solver.wins(s)
    regions = None
    labels = art.labels()
    for mv in solver.principal_variation(s):
        lab = labels[s.index]
        if lab == "mold":
            lin = orientations(art.mold)[mv.orientation][0]
            regions = art.region_masks(lin)
            print(f"turn {s.index + 1:2d}  P{s.mover}  mold, play face up")
        else:
            print(f"turn {s.index + 1:2d}  P{s.mover}  {lab:8s} -> {where(mv.mask, regions)}")
        s = _apply_raw(s, mv)[0]
    if s.exhausted:
        print(f"sequence done; P{s.mover} would move next and loses")
    else:
        print(f"turn {s.index + 1:2d}  P{s.mover}  {labels[s.index]:8s} has no legal drop, P{s.mover} loses")
    kay = KaylesSolver(g).solve(KaylesPosition.initial(g))
    print(f"n-tris first player {'wins' if wins else 'loses'}; kayles first player {kay.value}")


if __name__ == "__main__":
    main()
