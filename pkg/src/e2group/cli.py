"""Command-line interface.

Exit codes: 0 success, 1 data error (bad file, failed check), 2 usage error.
Every option can also be set through an environment variable
``E2GROUP_<COMMAND>_<OPTION>``, e.g. ``E2GROUP_VERIFY_SEED=7``.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import sys
from pathlib import Path

import click
import numpy as np
from scipy.spatial.transform import Rotation as Rotation3

from . import __version__
from .errors import DegenerateSimplexError, E2GroupError
from .measures import KAPPA_EXACT, kappa_mc, sphere_volume_mc, triangle_measure_mc
from .pachner import MOVE_KINDS, MoveSpec, apply_move, flatness_check
from .sampling import random_general_points, random_input
from .so4 import Rotation, embed_so3, haar_sample
from .statesum import (
    CutoffConfig,
    parse_labeled_triangulation,
    partition_estimate,
    weight_factors,
)
from .symbols import TenJInput, ten_j, ten_j_from_oracle, verify_lemma

TRIANGLES = list(itertools.combinations(range(1, 6), 3))
SUITES = ("lemma", "measure", "gauge", "flatness")


class DataError(click.ClickException):
    exit_code = 1


def fmt(x, style: str) -> str:
    """Six significant digits for humans, round-trip precision for CSV."""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return f"{x:.17g}" if style == "csv" else f"{x:.6g}"
    return str(x)


def label(face) -> str:
    return "".join(map(str, face)) if all(len(str(v)) == 1 for v in face) else "-".join(map(str, face))


def emit(rows, header, style, out=None):
    """Print rows as an aligned table or as CSV."""
    out = out or sys.stdout
    cells = [[fmt(x, style) for x in row] for row in rows]
    if style == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(header)
        w.writerows(cells)
        return
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h) for i, h in enumerate(header)]
    out.write("  ".join(h.ljust(w) for h, w in zip(header, widths)).rstrip() + "\n")
    for r in cells:
        out.write("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() + "\n")


def parse_list(value: str, kind, count: int, name: str) -> list:
    parts = [p for p in value.replace(",", " ").split() if p]
    if len(parts) != count:
        raise click.BadParameter(f"expected {count} values, got {len(parts)}", param_hint=name)
    try:
        return [kind(p) for p in parts]
    except ValueError:
        raise click.BadParameter(f"not a list of {kind.__name__} values: {value!r}", param_hint=name) from None


def read_labeled(path: str):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return parse_labeled_triangulation(text)
    except E2GroupError as exc:
        raise DataError(f"{path}: {exc}") from None


format_option = click.option(
    "--format", "style", type=click.Choice(["table", "csv"]), default="table", show_default=True, help="Output format."
)
seed_option = click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=0, show_default=True, help="Random seed.")


@click.group(context_settings={"auto_envvar_prefix": "E2GROUP", "help_option_names": ["-h", "--help"]})
@click.version_option(__version__)
def main():
    """Euclidean 2-group state sums: 10j symbols, checks and weights."""


# ---------------------------------------------------------------------------


@main.command()
@click.option("--lengths", required=True, help="Ten edge lengths in the order 12,13,14,15,23,24,25,34,35,45.")
@click.option("--spins", default="0,0,0,0,0,0,0,0,0,0", show_default=True, help="Ten spins in lexicographic triangle order.")
@click.option("--oracle", is_flag=True, help="Also rebuild the value from the rotation trace.")
@format_option
def tenj(lengths, spins, oracle, style):
    """Evaluate the 10j symbol of one 4-simplex."""
    ls = parse_list(lengths, float, 10, "--lengths")
    ss = parse_list(spins, int, 10, "--spins")
    if any(not (x > 0 and math.isfinite(x)) for x in ls):
        raise click.BadParameter("lengths must be positive", param_hint="--lengths")
    inp = TenJInput.from_values(ls, ss)
    try:
        res = ten_j(inp)
    except DegenerateSimplexError as exc:
        emit([["value", 0.0], ["note", f"weight zero: {exc}"]], ["quantity", "value"], style)
        return
    rows = [["value", res.value], ["V", res.V], ["sign", res.sign]]
    rows += [[f"phi_{label(t)}", res.dihedrals[t]] for t in TRIANGLES]
    if oracle:
        rows.append(["oracle_difference", abs(res.value - ten_j_from_oracle(inp))])
    emit(rows, ["quantity", "value"], style)


# ---------------------------------------------------------------------------


def _suite_lemma(n, rng, tol, samples):
    worst, worst_a, failed = 0.0, 0.0, 0
    for _ in range(n):
        inp = random_input(rng)
        ok = True
        try:
            for eta in (1, -1):
                rep = verify_lemma(inp, eta)
                worst = max(worst, rep.max_residual)
                worst_a = max(worst_a, rep.max_a_residual)
                ok &= rep.max_residual < tol and rep.max_a_residual < min(tol, 1e-9) and rep.epsilon == eta
        except E2GroupError:
            ok = False
        failed += not ok
    return failed, {"max_residual": worst, "max_a_residual": worst_a}


def _suite_gauge(n, rng, tol, samples):
    worst_closed, worst_gauge, failed = 0.0, 0.0, 0
    for _ in range(n):
        inp = random_input(rng)
        base = ten_j_from_oracle(inp)
        diff = abs(base - ten_j(inp).value)
        theta = rng.uniform(-math.pi, math.pi, 3)
        u = embed_so3(Rotation3.from_euler("zyx", theta).as_matrix())
        variants = [
            ten_j_from_oracle(inp, rotation=haar_sample(rng)),
            ten_j_from_oracle(inp, threshold=0.25, twist=haar_sample(rng)),
            ten_j_from_oracle(inp, reference_rotation=Rotation.from_matrix(u)),
        ]
        g = max(abs(v - base) for v in variants)
        worst_closed, worst_gauge = max(worst_closed, diff), max(worst_gauge, g)
        failed += not (diff < max(tol, 1e-8) and g < 1e-10)
    return failed, {"max_closed_form_difference": worst_closed, "max_gauge_difference": worst_gauge}


def _suite_flatness(n, rng, tol, samples):
    worst, failed = 0.0, 0
    for _ in range(n):
        pts = random_general_points(rng, "abcdef")
        res = max(abs(flatness_check(pts, side)) for side in ("A", "B"))
        worst = max(worst, res)
        failed += not res < tol
    return failed, {"max_residual": worst}


def _suite_measure(n, rng, tol, samples):
    failed, worst = 0, 0.0
    for _ in range(n):
        a, b = sorted(rng.uniform(0.5, 2.0, 2))
        c = rng.uniform(b - a + 0.1 * a, a + b - 0.1 * a)
        est = triangle_measure_mc(a, b, c, samples, rng)
        dev = abs(est.value - est.expected)
        worst = max(worst, dev / est.expected)
        failed += not dev <= 4 * est.error + 1e-12
    sphere = sphere_volume_mc(1.0, samples, rng)
    sphere2 = sphere_volume_mc(2.0, samples, rng)
    ext = {e: x for e, x in zip(((1, 2), (2, 3), (3, 4), (4, 5), (1, 5)), rng.uniform(0.9, 1.1, 5))}
    kappa = kappa_mc(ext, samples, rng)
    failed += not abs(sphere.value - math.pi) <= 4 * sphere.error
    failed += not abs(kappa.value - KAPPA_EXACT) <= 4 * kappa.error
    return failed, {
        "max_triangle_deviation": worst,
        "sphere_volume_l1": sphere.value,
        "sphere_volume_l2": sphere2.value,
        "sphere_l2_over_pi_l2": sphere2.value / (4 * math.pi),
        "sphere_l2_over_pi_l3": sphere2.value / (8 * math.pi),
        "kappa": kappa.value,
        "kappa_error": kappa.error,
        "kappa_expected": KAPPA_EXACT,
    }


SUITE_FUNCS = {"lemma": _suite_lemma, "measure": _suite_measure, "gauge": _suite_gauge, "flatness": _suite_flatness}


@main.command()
@click.argument("suite", type=click.Choice(SUITES))
@click.argument("n", type=click.IntRange(1), default=100)
@seed_option
@click.option("--tol", type=float, default=1e-8, show_default=True, help="Residual tolerance.")
@click.option("--samples", type=click.IntRange(1000), default=100_000, show_default=True, help="Monte Carlo samples (measure suite).")
@format_option
def verify(suite, n, seed, tol, samples, style):
    """Run a randomized property suite on N cases."""
    rng = np.random.default_rng(seed)
    failed, stats = SUITE_FUNCS[suite](n, rng, tol, samples)
    checks = n + (2 if suite == "measure" else 0)
    rows = [["suite", suite], ["seed", seed], ["cases", checks], ["passed", checks - failed], ["failed", failed]]
    rows += [[k, v] for k, v in stats.items()]
    emit(rows, ["quantity", "value"], style)
    summary = " ".join(f"{k}={fmt(v, 'csv')}" for k, v in rows[1:] if k != "suite")
    click.echo(f"SUMMARY suite={suite} {summary} status={'pass' if failed == 0 else 'fail'}")
    if failed:
        sys.exit(1)


# ---------------------------------------------------------------------------


@main.command(name="weight")
@click.argument("file", type=click.Path(dir_okay=False))
@format_option
def weight_cmd(file, style):
    """State-sum weight of a labelled triangulation with all its factors."""
    tri, lab = read_labeled(file)
    try:
        f = weight_factors(tri, lab)
    except E2GroupError as exc:
        raise DataError(f"{file}: {exc}") from None
    rows = [["area2", label(t), v] for t, v in f.areas.items()]
    rows += [["tet_sign", label(t), v] for t, v in f.tet_signs.items()]
    rows += [["tenj", label(p), v] for p, v in f.ten_j.items()]
    if f.zero_reason:
        rows.append(["zero", "-", f.zero_reason])
    rows.append(["weight", "-", f.total])
    rows.append(["cosine_form", "-", f.cosine_total])
    emit(rows, ["factor", "face", "value"], style)


@main.command()
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--triangle", default=None, help="Triangle whose spin is scanned, e.g. 1,2,3 (default: first).")
@click.option("--from", "start", type=int, default=0, show_default=True, help="First spin.")
@click.option("--to", "stop", type=int, default=10, show_default=True, help="Last spin (inclusive).")
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="CSV output path (default stdout).")
@click.option("--plot", type=click.Path(dir_okay=False), default=None, help="Also save a PNG plot of the value.")
def scan(file, triangle, start, stop, output, plot):
    """Tabulate the 10j symbol of a single-pent file over one triangle's spin."""
    tri, lab = read_labeled(file)
    if len(tri.pents) != 1:
        raise DataError(f"{file}: scan needs a file with exactly one pent")
    (pent,) = tri.pents
    tris = list(itertools.combinations(pent, 3))
    if triangle is None:
        target = tris[0]
    else:
        target = tuple(sorted(int(v) if v.strip().lstrip("-").isdigit() else v.strip() for v in triangle.split(",")))
        if target not in tris:
            raise click.BadParameter(f"{triangle} is not a triangle of {pent}", param_hint="--triangle")
    try:
        base = lab.pent_input(pent)
    except E2GroupError as exc:
        raise DataError(f"{file}: {exc}") from None
    header = [f"s_{label(t)}" for t in tris] + ["value", "V", "sum_s_phi"]
    rows = []
    for s in range(start, stop + 1):
        inp = base.with_spins({**base.spins, target: s})
        try:
            res = ten_j(inp)
        except DegenerateSimplexError as exc:
            raise DataError(f"{file}: {exc}") from None
        phase = sum(inp.spins[t] * res.dihedrals[t] for t in tris)
        rows.append([inp.spins[t] for t in tris] + [res.value, res.V, phase])
    buf = io.StringIO()
    emit(rows, header, "csv", buf)
    if output:
        try:
            Path(output).write_text(buf.getvalue(), encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot write {output}: {exc.strerror}") from None
    else:
        click.echo(buf.getvalue(), nl=False)
    if plot:
        from .plotting import plot_scan

        try:
            plot_scan([r[tris.index(target)] for r in rows], [r[-3] for r in rows], label(target), plot)
        except OSError as exc:
            raise DataError(f"cannot write {plot}: {exc.strerror}") from None


@main.command()
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--kind", type=click.Choice(sorted(MOVE_KINDS)), required=True, help="Move type.")
@click.option("--target", required=True, help="Comma-separated vertices of the face the move removes.")
@click.option("--fresh", default=None, help="Label of the new vertex (1-5 moves).")
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None, help="Output file (default stdout).")
def move(file, kind, target, fresh, output):
    """Apply a Pachner move and print the new triangulation."""
    tri, lab = read_labeled(file)

    def conv(v):
        v = v.strip()
        return int(v) if v.lstrip("-").isdigit() else v

    try:
        move_spec = MoveSpec(kind, tuple(conv(v) for v in target.split(",")), conv(fresh) if fresh else None)
        new = apply_move(tri, move_spec)
    except E2GroupError as exc:
        raise DataError(str(exc)) from None
    edges = set(new.edges)
    kept = type(lab)({e: x for e, x in lab.l.items() if e in edges}, {t: s for t, s in lab.s.items() if t in set(new.triangles)})
    text = new.to_text(kept)
    if output:
        try:
            Path(output).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise DataError(f"cannot write {output}: {exc.strerror}") from None
    else:
        click.echo(text, nl=False)


@main.command()
@click.argument("file", type=click.Path(dir_okay=False))
@click.option("--cutoff-length", type=click.FloatRange(min=0, min_open=True), default=1.0, show_default=True, help="Length cutoff L.")
@click.option("--cutoff-spin", type=click.IntRange(0), default=0, show_default=True, help="Spin cutoff S.")
@click.option("--samples", type=click.IntRange(2), default=1000, show_default=True, help="Monte Carlo samples.")
@seed_option
@format_option
def partition(file, cutoff_length, cutoff_spin, samples, seed, style):
    """Cutoff Monte Carlo estimate of the partition sum of a closed triangulation."""
    tri, _ = read_labeled(file)
    cfg = CutoffConfig(L=cutoff_length, S=cutoff_spin, samples=samples, seed=seed)
    try:
        est = partition_estimate(tri, cfg)
    except E2GroupError as exc:
        raise DataError(str(exc)) from None
    rows = [
        ["estimate", est.value],
        ["error", est.error],
        ["acceptance", est.acceptance],
        ["samples", samples],
        ["seed", seed],
        ["cutoff_length", cutoff_length],
        ["cutoff_spin", cutoff_spin],
    ]
    emit(rows, ["quantity", "value"], style)


if __name__ == "__main__":  # pragma: no cover
    main()
