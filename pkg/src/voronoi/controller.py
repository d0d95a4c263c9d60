from math import ceil, gcd

from src.coeffs.controller import source_arguments, source_from_args
from src.schemas.report import Report
from src.utils.pool import ordered_map
from src.utils.router import CommandRouter, arg
from src.voronoi import service
from src.voronoi.model import VoronoiInstance, VoronoiRow, VoronoiSummary
from src.weights.service import make_interval_bump

router = CommandRouter(tags=["Voronoi summation"])


@router.command(
    "voronoi-check",
    help="Compare both sides of the Voronoi formula for every (q, d). CSV columns: q, d, lhs_re, lhs_im, "
    "rhs_re, rhs_im, residual, m_cut, tail_estimate.",
    arguments=[
        *source_arguments(),
        arg("--q", type=int, nargs="+", default=[1], help="Moduli q (multiples of the level)."),
        arg("--d", type=int, nargs="+", default=None, help="Numerators d (default: every d coprime to q)."),
        arg("--lo", type=float, default=1000.0, help="Left end of the bump g."),
        arg("--hi", type=float, default=2000.0, help="Right end of the bump g."),
        arg("--steepness", type=float, default=1.0, help="Mollifier steepness of g."),
        arg("--m-cut", type=int, default=None, dest="m_cut", help="Fixed dual truncation (default: measured)."),
        arg("--tolerance", type=float, default=1e-6, help="Largest accepted residual."),
    ],
)
def voronoi_check(args, config) -> Report[VoronoiRow]:
    source = source_from_args(args, 2 * int(ceil(args.hi)) + 4096)
    g = make_interval_bump(args.lo, args.hi, args.steepness)
    instances = [
        VoronoiInstance(source=source, d=d, q=q, g=g, m_cut=args.m_cut)
        for q in args.q
        for d in (args.d or range(1, q + 1))
        if gcd(d, q) == 1
    ]
    results = ordered_map(lambda instance: service.voronoi_residual(instance, args.tolerance), instances, args.threads)
    summary = VoronoiSummary(
        rows=[VoronoiRow.from_result(result) for result in results],
        max_residual=max((result.residual for result in results), default=0.0),
    )
    return Report.create("voronoi-check", config, summary.rows, max_residual=summary.max_residual, checks=len(results))
