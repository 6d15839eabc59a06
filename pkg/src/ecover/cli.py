"""The ``ec`` command line.

Exit codes: 0 success, 1 validation error, 2 invalid certificate,
3 inconclusive search (or a result that needs an uncertified presentation).
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .chains import (
    Chain,
    ChainError,
    NotFoundWithinBudget,
    load_certificate,
    search_homotopy,
    verify_certificate,
)
from .cover import build_cover
from .groups import Certification, UncertifiedError
from .metric import (
    FiniteMetricSpace,
    SpaceValidationError,
    chain_connected,
    load_space,
    save_space,
    scale_graph,
    write_dot,
)
from .presentation import chain_class, presentation, tree_path
from .reports import analysis_report, dumps, presentation_report, tower_report, tower_svg, write_json
from .spaces import DensityTooCoarse, Family, SamplerSpec, sample
from .tower import ScheduleError, analyze_scale, run_tower, theta, universality_check

EXIT_OK, EXIT_INVALID, EXIT_BAD_CERT, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class Fail(click.ClickException):
    def __init__(self, message: str, code: int = EXIT_INVALID):
        super().__init__(message)
        self.exit_code = code


def _space(path: str) -> FiniteMetricSpace:
    p = Path(path)
    if not p.is_file():
        raise Fail(f"no such input file: {path}")
    try:
        return load_space(p)
    except SpaceValidationError as exc:
        raise Fail(f"invalid space: {exc}") from None


def _chain_arg(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(t) for t in text.replace(" ", "").split(",") if t)
    except ValueError:
        raise Fail(f"chain must be comma-separated point indices, got {text!r}") from None


def _positive(_ctx, _param, value):
    if value is not None and not value > 0:
        raise click.BadParameter("must be positive")
    return value


input_opt = click.option("--input", "input_", required=True, metavar="FILE", help="ec-space/1 file.")
scale_opt = click.option("--scale", type=float, required=True, callback=_positive, help="Scale epsilon (strict: d < epsilon).")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="ec")
def cli():
    """Deck groups of finite metric spaces at a scale, and towers of scales."""


@cli.command()
@input_opt
@scale_opt
@click.option("--emit-dot", type=click.Path(dir_okay=False), help="Write the scale graph as DOT.")
def graph(input_, scale, emit_dot):
    """Summarize the scale graph."""
    space = _space(input_)
    g = scale_graph(space, scale)
    conn = chain_connected(g)
    click.echo(f"points {space.n}  edges {len(g.edges)}  triangles {len(g.triangles)}  components {conn.n_components}")
    if emit_dot:
        write_dot(g, emit_dot)


@cli.command()
@click.option("--space", "--input", "space_", required=True, metavar="FILE", help="ec-space/1 file.")
@scale_opt
@click.option("--from", "from_", metavar="CHAIN", help="Start chain, e.g. 0,1,2.")
@click.option("--to", "to_", metavar="CHAIN", help="Target chain.")
@click.option("--verify", "verify_path", type=click.Path(dir_okay=False), help="Verify this ec-cert/1 file instead of searching.")
@click.option("--out", type=click.Path(dir_okay=False), help="Write the found certificate here (default stdout).")
@click.option("--budget", type=int, default=200_000, show_default=True)
def certify(space_, scale, from_, to_, verify_path, out, budget):
    """Find or check a homotopy certificate between two chains."""
    space = _space(space_)
    g = scale_graph(space, scale)
    if verify_path:
        try:
            cert = load_certificate(g, verify_path)
        except FileNotFoundError:
            raise Fail(f"no such certificate file: {verify_path}") from None
        except (ChainError, KeyError, ValueError, json.JSONDecodeError) as exc:
            raise Fail(f"invalid certificate: {exc}", EXIT_BAD_CERT) from None
        try:
            end = verify_certificate(cert)
        except ChainError as exc:
            raise Fail(f"invalid certificate: {exc}", EXIT_BAD_CERT) from None
        if from_ and _chain_arg(from_) != cert.start.vertices:
            raise Fail("certificate does not start at --from", EXIT_BAD_CERT)
        if to_ and _chain_arg(to_) != end.vertices:
            raise Fail(f"certificate ends at {','.join(map(str, end.vertices))}, not --to", EXIT_BAD_CERT)
        click.echo(f"verified: {len(cert)} moves, ends at {','.join(map(str, end.vertices))}")
        return
    if not (from_ and to_):
        raise Fail("give --from and --to, or --verify")
    try:
        a, b = Chain.of(g, _chain_arg(from_)), Chain.of(g, _chain_arg(to_))
        cert = search_homotopy(a, b, budget=budget)
    except NotFoundWithinBudget as exc:
        note = _group_verdict(g, _chain_arg(from_), _chain_arg(to_))
        raise Fail(f"inconclusive: {exc}{note}", EXIT_INCONCLUSIVE) from None
    except ChainError as exc:
        raise Fail(str(exc)) from None
    text = dumps(cert.to_json())
    if out:
        Path(out).write_text(text)
        click.echo(f"certificate with {len(cert)} moves written to {out}")
    else:
        click.echo(text, nl=False)


def _group_verdict(g, a: tuple[int, ...], b: tuple[int, ...]) -> str:
    """Decide equivalence through the presentation when it is certified."""
    analysis = analyze_scale(g)
    pres = analysis.pres
    if a[0] not in pres.component:
        return ""
    lead = tree_path(pres, a[0])
    loop = lead + a[1:] + tuple(reversed(b))[1:] + tuple(reversed(lead))[1:]
    word = chain_class(pres, loop).word
    if any(analysis.basis.coordinates(word)):
        return "; the chains are NOT homotopic (their difference is nonzero in the abelianization)"
    if analysis.flag is Certification.FREE:
        same = not analysis.simplification.rewrite(word)
        return "; the chains ARE homotopic (certified free group)" if same else "; the chains are NOT homotopic (certified free group)"
    if analysis.flag is Certification.TRIVIAL:
        return "; the chains ARE homotopic (trivial group)"
    return ""


@cli.command()
@input_opt
@scale_opt
@click.option("--emit-json", type=click.Path(dir_okay=False), help="Write generators, relators and rank bound.")
def present(input_, scale, emit_json):
    """Presentation of the deck group at a scale."""
    pres = presentation(scale_graph(_space(input_), scale))
    doc = presentation_report(pres)
    if emit_json:
        write_json(doc, emit_json)
    click.echo(f"generators {pres.ngens}  relators {len(pres.relators)}  rank_upper {pres.rank_upper()}")


@cli.command()
@input_opt
@scale_opt
@click.option("--emit-json", type=click.Path(dir_okay=False), help="Write the full report.")
def analyze(input_, scale, emit_json):
    """Invariants, certification and universality at one scale."""
    a = analyze_scale(_space(input_), scale)
    verdict = universality_check(a)
    doc = analysis_report(a, verdict)
    if emit_json:
        write_json(doc, emit_json)
    torsion = ",".join(map(str, a.invariants.torsion)) or "none"
    click.echo(f"scale {scale:g}: betti {a.invariants.betti}  torsion {torsion}  {a.flag.value}")
    click.echo(f"universal at scale: {verdict.verdict.value}")


def _schedule(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise Fail(f"--scales must be comma-separated numbers, got {text!r}") from None


@cli.command()
@input_opt
@click.option("--scales", help="Comma-separated decreasing scales.")
@click.option("--auto", is_flag=True, help="Geometric schedule from the diameter down to the spacing.")
@click.option("--window", type=int, default=3, show_default=True, help="Consecutive isomorphisms needed for Stable.")
@click.option("--emit-json", type=click.Path(dir_okay=False))
@click.option("--emit-svg", type=click.Path(dir_okay=False))
def tower(input_, scales, auto, window, emit_json, emit_svg):
    """Run a tower of scales."""
    if bool(scales) == bool(auto):
        raise Fail("give exactly one of --scales or --auto")
    space = _space(input_)
    try:
        t = run_tower(space, None if auto else _schedule(scales), stable_window=window)
    except ScheduleError as exc:
        raise Fail(str(exc)) from None
    doc = tower_report(t)
    if emit_json:
        write_json(doc, emit_json)
    if emit_svg:
        tower_svg(t, emit_svg)
    for a in t.analyses:
        click.echo(f"{a.scale:<12g} betti {a.invariants.betti:<4d} {a.flag.value}")
    state, rank = t.stabilization
    click.echo(f"stabilization: {state}" + (f" (rank {rank})" if rank is not None else ""))


@cli.command()
@input_opt
@scale_opt
@click.option("--radius", type=click.IntRange(min=0), required=True)
@click.option("--mode", type=click.Choice(["free", "abelian"]), default="free", show_default=True)
@click.option("--emit-dot", type=click.Path(dir_okay=False))
def cover(input_, scale, radius, mode, emit_dot):
    """Truncated cover around the base vertex."""
    a = analyze_scale(_space(input_), scale)
    try:
        c = build_cover(a.pres, a.simplification, radius, mode)
    except UncertifiedError as exc:
        raise Fail(str(exc), EXIT_INCONCLUSIVE) from None
    if emit_dot:
        c.write_dot(emit_dot)
    click.echo(f"vertices {len(c.vertices)}  edges {len(c.edges)}  deck rank {c.deck_rank}")


@cli.command("theta")
@input_opt
@click.option("--coarse", type=float, required=True, callback=_positive)
@click.option("--fine", type=float, required=True, callback=_positive)
@click.option("--probe-length", type=click.IntRange(min=0), default=4, show_default=True)
@click.option("--emit-dot", type=click.Path(dir_okay=False), help="Write the folded image graph as DOT.")
def theta_cmd(input_, coarse, fine, probe_length, emit_dot):
    """The coarsening homomorphism between two scales."""
    space = _space(input_)
    try:
        th = theta(analyze_scale(space, coarse), analyze_scale(space, fine))
    except ScheduleError as exc:
        raise Fail(str(exc)) from None
    click.echo(f"matrix {[list(r) for r in th.matrix]}")
    click.echo(f"abelian surjective {th.abelian_surjective}  kernel rank {th.kernel_rank}")
    if th.folded is None:
        if emit_dot:
            raise Fail("folding needs both scales certified free", EXIT_INCONCLUSIVE)
        click.echo("folding: skipped (a scale is not certified free)")
        return
    click.echo(f"folded surjective {th.folded_surjective}")
    if emit_dot:
        Path(emit_dot).write_text(th.folded.to_dot())
    if probe_length:
        probe = th.probe_kernel(probe_length)
        found = " ".join(map(str, probe.witness)) if probe.found else f"none up to length {probe.bound}"
        click.echo(f"kernel witness: {found}")


@cli.command()
@click.option("--family", type=click.Choice([f.value for f in Family]), required=True)
@click.option("--level", type=click.IntRange(min=0), default=1, show_default=True)
@click.option("--density", type=float, default=0.05, show_default=True, callback=_positive)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def generate(family, level, density, out):
    """Write a sampled example space."""
    try:
        space = sample(SamplerSpec(Family(family), level, density))
    except (DensityTooCoarse, ValueError) as exc:
        raise Fail(str(exc)) from None
    save_space(space, out)
    click.echo(f"{space.n} points written to {out}")


def main(argv: list[str] | None = None) -> int:
    try:
        cli.main(args=argv, prog_name="ec", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.Abort:
        click.echo("aborted", err=True)
        return EXIT_INVALID
    except click.ClickException as exc:
        exc.show()
        return exc.exit_code if isinstance(exc, Fail) else EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
