"""Command-line entry point: ``polycube-games <subcommand> ...``.

Exit status: 0 success (or all checks pass), 1 a check failed, 2 bad usage
or unreadable input, 3 a solver ran out of its node budget.
"""

from __future__ import annotations

import argparse
import random
import sys
import time
from pathlib import Path
from typing import Callable, Sequence, TextIO

from .formats import (
    FormatError,
    NtrisInstance,
    PackingInstance,
    format_ntris_instance,
    format_packing_instance,
    parse_graph,
    parse_instance,
    render_layers,
    render_mesh,
)
from .kayles import KaylesPosition, KaylesSolver, Outcome
from .ntris import TetrisSolver, _apply_raw, drop_moves
from .ntris_reduce import compile_ntris, verify_tetris_reduction
from .pack_reduce import compile_packing, corrupt_mold, verify_pack_reduction
from .packing import BudgetExceeded, PackSolver, PackState, pack_apply, pack_legal_moves

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected on or off")
    return text == "on"


def _read(path: str) -> str:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{path}: no such file")
    return p.read_text()


def _write(text: str, out: str | None, stdout: TextIO) -> None:
    if out in (None, "-"):
        stdout.write(text)
    else:
        Path(out).write_text(text)


def _load_graph(args):
    g, partition = parse_graph(_read(args.graph), multigraph=getattr(args, "multigraph", False))
    return g, partition


# ---------------------------------------------------------------- kayles


def cmd_kayles(args, out: TextIO) -> int:
    g, partition = _load_graph(args)
    pos = KaylesPosition.initial(g, partition)
    solver = KaylesSolver(g, partition)
    outcome = solver.solve(pos)
    out.write(f"first-player {'wins' if outcome else 'loses'}\n")
    pv = solver.principal_variation(pos)
    out.write("principal variation: " + (" ".join(map(str, pv)) if pv else "(none)") + "\n")
    return EXIT_OK


# ---------------------------------------------------------------- compile


def _packing_instance(args, g, partition) -> PackingInstance:
    art = compile_packing(
        g, variant=args.variant, partisan=args.partisan, partition=partition,
        allow_reflections=args.reflections,
    )
    pre = art.preplaced()
    return PackingInstance(
        art.box, art.piece_list(), [pre] if pre is not None else [], args.reflections, args.partisan,
    )


def cmd_compile(args, out: TextIO) -> int:
    g, partition = _load_graph(args)
    if args.game == "pack":
        text = format_packing_instance(_packing_instance(args, g, partition))
    else:
        if args.partisan or args.variant != "premold" or args.reflections:
            raise UsageError("--variant, --partisan and --reflections apply to --game pack only")
        art = compile_ntris(g, args.clearing)
        text = format_ntris_instance(NtrisInstance(art.box, art.sequence, art.plane_clearing))
    _write(text, args.output, out)
    return EXIT_OK


# ---------------------------------------------------------------- solve


def _describe_pack(s: PackState, mv) -> str:
    lo = min(mv.placement.resulting_cells)
    return f"place {s.kinds[mv.kind].label} ({len(mv.placement)} cells, min cell {lo[0]} {lo[1]} {lo[2]})"


def cmd_solve(args, out: TextIO) -> int:
    inst = parse_instance(_read(args.instance))
    t0 = time.perf_counter()
    if isinstance(inst, PackingInstance):
        solver = PackSolver(args.budget_nodes)
        s = inst.state()
        try:
            outcome = Outcome.of(solver.wins(s))
            pv = solver.principal_variation(s)
        except BudgetExceeded:
            return _budget(out, solver.nodes, t0)
        out.write(f"outcome {outcome.value} (player {s.mover} to move)\n")
        for mv in pv:
            out.write(_describe_pack(s, mv) + "\n")
            s = pack_apply(s, mv)
    else:
        solver = TetrisSolver(args.budget_nodes)
        s = inst.state()
        try:
            outcome = Outcome.of(solver.wins(s))
            pv = solver.principal_variation(s)
        except BudgetExceeded:
            return _budget(out, solver.nodes, t0)
        out.write(f"outcome {outcome.value} (player {s.mover} to move)\n")
        for mv in pv:
            out.write(mv.script() + "\n")
    out.write(f"RESULT {outcome.value} nodes={solver.nodes} time={time.perf_counter() - t0:.3f}\n")
    return EXIT_OK


def _budget(out: TextIO, nodes: int, t0: float) -> int:
    out.write(f"BUDGET exhausted nodes={nodes} time={time.perf_counter() - t0:.3f}\n")
    return EXIT_BUDGET


# ---------------------------------------------------------------- verify


def cmd_verify(args, out: TextIO) -> int:
    g, partition = _load_graph(args)
    if args.game == "pack":
        # a partition in the file is the one the partisan run uses
        art = compile_packing(g, partisan=partition is not None, partition=partition,
                              allow_reflections=args.reflections)
        if args.negative_control:
            art = corrupt_mold(art)
        rep = verify_pack_reduction(
            allow_reflections=args.reflections, partisan=None if args.partisan else False,
            budget=args.budget_nodes, artifacts=art,
        )
    else:
        shortfall = 0
        if args.negative_control:
            # one garbage bar short
            shortfall = compile_ntris(g).L
        art = compile_ntris(g, False, shortfall)
        rep = verify_tetris_reduction(
            plane_clearing=None if args.clearing else False, budget=args.budget_nodes, artifacts=art,
        )
    out.write(str(rep) + "\n")
    if rep.budget_exhausted:
        return EXIT_BUDGET
    return EXIT_OK if rep.ok else EXIT_FAIL


# ---------------------------------------------------------------- export


def _pieces_of(inst):
    if isinstance(inst, PackingInstance):
        return [(lab, p) for lab, p, _ in inst.pieces], inst.preplaced
    return list(inst.sequence), []


def cmd_export(args, out: TextIO) -> int:
    inst = parse_instance(_read(args.instance))
    items, pre = _pieces_of(inst)
    if args.pieces:
        wanted = args.pieces.split(",")
        unknown = sorted(set(wanted) - {lab for lab, _ in items})
        if unknown:
            raise UsageError(f"unknown piece ids: {' '.join(unknown)}")
        items = [(lab, p) for lab, p in items if lab in wanted]
    render = render_layers if args.format == "layers" else render_mesh
    _write(render(inst.box, items, pre), args.output, out)
    return EXIT_OK


# ---------------------------------------------------------------- play


def _board_text(box, occupied_cells, limit: int = 4096) -> str:
    if box.volume > limit:
        return f"board {box.nx}x{box.ny}x{box.nz}: {len(occupied_cells)} cells occupied\n"
    from .voxel import Polycube

    pre = [Polycube(sorted(occupied_cells))] if occupied_cells else []
    return render_layers(box, [], pre)


def cmd_play(args, out: TextIO, read_line: Callable[[], str] | None = None) -> int:
    """Text loop: the mover types a move number, ``hint``, ``random`` or ``quit``."""
    inst = parse_instance(_read(args.instance))
    read_line = read_line or (lambda: input())
    rng = random.Random(args.seed)
    tetris = isinstance(inst, NtrisInstance)
    s = inst.state()
    labels = [lab for lab, _ in inst.sequence] if tetris else None
    while True:
        out.write(_board_text(s.box, s.occupied_cells))
        if tetris:
            moves = drop_moves(s)
            if s.exhausted:
                out.write(f"sequence exhausted; P{s.mover} has no piece to place and loses. game over\n")
                return EXIT_OK
            what = f"piece {s.index + 1}/{len(s.sequence)} ({labels[s.index]})"
        else:
            moves = pack_legal_moves(s)
            what = f"{s.remaining} pieces left"
        if not moves:
            out.write(f"P{s.mover} cannot move and loses. game over\n")
            return EXIT_OK
        out.write(f"P{s.mover} to move, {what}, {len(moves)} legal moves\n")
        for k, mv in enumerate(moves):
            out.write(f"  [{k}] {mv.script() if tetris else _describe_pack(s, mv)}\n")
        while True:
            out.write("> ")
            out.flush()
            try:
                line = read_line().strip()
            except EOFError:
                out.write("\n")
                return EXIT_OK
            if line == "quit":
                return EXIT_OK
            if line == "hint":
                solver = TetrisSolver(args.budget_nodes) if tetris else PackSolver(args.budget_nodes)
                try:
                    outcome, best = solver.solve(s)
                except BudgetExceeded:
                    out.write("hint: node budget exhausted\n")
                    continue
                idx = next(k for k, mv in enumerate(moves) if mv.mask == best.mask)
                out.write(f"hint: [{idx}] ({outcome.value} for P{s.mover})\n")
                continue
            if line == "random":
                choice = rng.randrange(len(moves))
            else:
                try:
                    choice = int(line)
                except ValueError:
                    out.write("enter a move number, hint, random or quit\n")
                    continue
                if not 0 <= choice < len(moves):
                    out.write(f"move number must be in 0..{len(moves) - 1}\n")
                    continue
            break
        mv = moves[choice]
        out.write(f"P{s.mover} plays [{choice}]\n")
        s = _apply_raw(s, mv)[0] if tetris else pack_apply(s, mv)


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="polycube-games", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, graph: bool = True):
        if graph:
            p.add_argument("graph", help="graph file")
            p.add_argument("--multigraph", action="store_true", help="keep repeated edges as separate wiring rows")
        p.add_argument("--budget-nodes", type=_positive, default=None, metavar="N")
        p.add_argument("--seed", type=int, default=0, metavar="N")

    p = sub.add_parser("kayles", help="solve Node Kayles on a graph file")
    common(p)
    p.set_defaults(func=cmd_kayles)

    p = sub.add_parser("compile", help="compile a graph into a game instance")
    common(p)
    p.add_argument("--game", choices=("pack", "ntris"), required=True)
    p.add_argument("--variant", choices=("premold", "empty"), default="premold")
    p.add_argument("--partisan", action="store_true")
    p.add_argument("--reflections", type=_on_off, default=False, metavar="on|off")
    p.add_argument("--clearing", type=_on_off, default=False, metavar="on|off")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("solve", help="solve an instance file")
    p.add_argument("instance")
    common(p, graph=False)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="machine-check a reduction on a graph")
    common(p)
    p.add_argument("--game", choices=("pack", "ntris"), required=True)
    p.add_argument("--partisan", action="store_true", help="also run the partisan end-to-end check")
    p.add_argument("--reflections", type=_on_off, default=False, metavar="on|off")
    p.add_argument("--clearing", type=_on_off, default=False, metavar="on|off")
    p.add_argument("--negative-control", action="store_true",
                   help="verify a deliberately broken build (one mold cell deleted / chute one garbage short)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export", help="render an instance as ASCII layers or an OBJ mesh")
    p.add_argument("instance")
    p.add_argument("--format", choices=("layers", "mesh"), required=True)
    p.add_argument("--pieces", default=None, help="comma-separated piece ids (default: all)")
    p.add_argument("-o", "--output", default=None)
    common(p, graph=False)
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("play", help="play an instance in the terminal")
    p.add_argument("instance")
    common(p, graph=False)
    p.set_defaults(func=cmd_play)
    return ap


def main(argv: Sequence[str] | None = None, stdout: TextIO | None = None) -> int:
    out = stdout or sys.stdout
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except (UsageError, FormatError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
