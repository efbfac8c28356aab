"""Walk through the packing construction on a path of three vertices.

Builds the mold and vertex pieces, shows the cavity layer by layer, then
plays the premold game under perfect play and reads the Kayles moves back
off the pieces that were placed.

    python3 demos/packing_walkthrough.py
"""

from polycube_games import Graph, KaylesPosition, KaylesSolver, PackSolver, pack_apply
from polycube_games.formats import render_layers
from polycube_games.pack_reduce import compile_packing, verify_pack_reduction


def main():
    g = Graph.from_edges(3, [(1, 2), (2, 3)])
    art = compile_packing(g)
    print(f"graph: 3 vertices, edges {list(g.edges)}")
    print(f"box {art.box.nx} x {art.box.ny} x {art.box.nz}, mold {len(art.mold)} cells, "
          f"cavity {len(art.cavity)} cells, {art.bridges} bridges")
    print()
    print("cavity with each vertex piece in its forced spot (* = shared edge cells):")
    print(render_layers(art.box, [(f"v{i}", art.vertex_pieces[i]) for i in g.vertices]))

    # perfect play from the position right after the mold is down
    s = art.state()
    solver = PackSolver()
    first_wins = solver.wins(s)
    line = []
    print(f"packing: player 1 {'wins' if first_wins else 'loses'} with the mold already placed")
    for mv in solver.principal_variation(s):
        label = s.kinds[mv.kind].label
        line.append(int(label[1:]))
        print(f"  P{s.mover} places {label}")
        s = pack_apply(s, mv)
    print(f"  P{s.mover} has nothing left that fits")

    kay = KaylesSolver(g).solve(KaylesPosition.initial(g))
    print(f"kayles: first player {kay.value}; the packing line marks vertices {line}")
    print()
    print(verify_pack_reduction(g))


if __name__ == "__main__":
    main()
