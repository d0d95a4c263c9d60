from src.coeffs.controller import source_arguments
from src.exceptions.jutila import SchemeArgumentError
from src.jutila import service
from src.jutila.model import ComparisonRow, L2Row
from src.schemas.report import Report
from src.shifted.controller import build_specs, spec_arguments
from src.utils.pool import ordered_map
from src.utils.router import CommandRouter, arg

router = CommandRouter(tags=["Circle method"])

DEFAULT_DELTA_EXPONENTS = [2.0, 1.5, 1.0]

scheme_arguments = [
    arg("--N", type=int, default=1, help="Level N of the denominator filter."),
]


@router.command(
    "jutila-l2",
    help="Exact L² error of the overlapping-interval approximation against 10·δ^{-1}L^{-2}Q^{2.1}. "
    "CSV columns: Q, delta, L, moduli, l2_exact, bound, ratio.",
    arguments=[
        arg("--Q", type=float, nargs="+", default=[10.0, 30.0, 100.0], help="Scheme sizes Q."),
        arg("--delta", type=float, default=None, help="Arc half-width δ (default: one row per δ = Q^-e)."),
        arg(
            "--delta-exponents",
            type=float,
            nargs="+",
            default=None,
            dest="delta_exponents",
            help="Exponents e for δ = Q^-e (default: 2 1.5 1).",
        ),
        *scheme_arguments,
        arg("--a", type=int, default=1, help="Filter coefficient a."),
        arg("--b", type=int, default=1, help="Filter coefficient b."),
        arg("--h", type=int, default=1, help="Filter shift h."),
        arg("--assert-bound", action="store_true", dest="assert_bound", help="Fail when a row exceeds the bound."),
    ],
)
def jutila_l2(args, config) -> Report[L2Row]:
    if args.delta is not None and args.delta_exponents:
        raise SchemeArgumentError("--delta and --delta-exponents are exclusive")
    pairs = []
    for Q in args.Q:
        if args.delta is not None:
            pairs.append((Q, args.delta))
        else:
            pairs.extend((Q, Q**-exponent) for exponent in args.delta_exponents or DEFAULT_DELTA_EXPONENTS)

    def row(pair: tuple[float, float]) -> L2Row:
        Q, delta = pair
        scheme = service.build_scheme(Q, delta, args.N, args.a, args.b, args.h)
        return service.l2_row(scheme, args.assert_bound, args.seed)

    rows = ordered_map(row, pairs, args.threads)
    return Report.create("jutila-l2", config, rows, max_ratio=max(r.ratio for r in rows))


@router.command(
    "shifted-compare",
    help="Compare D_F with the circle-method approximation D̃_F on box weights. CSV columns: a, b, h, A, B, P, "
    "Q, delta, L, D_direct, D_direct_im, D_exact_integral, D_tilde, D_tilde_im, diff, eq15_scale, dual_scale, "
    "main_term.",
    arguments=[
        *source_arguments("divisor"),
        *spec_arguments(),
        arg("--Q", type=float, nargs="+", default=None, help="Scheme sizes (default: the balanced choice)."),
        arg("--delta", type=float, default=None, help="Arc half-width (default: the balanced choice)."),
        *scheme_arguments,
    ],
)
def shifted_compare(args, config) -> Report[ComparisonRow]:
    rows = []
    for spec in build_specs(args):
        weight = spec.weight
        balanced = service.balanced_parameters(weight.A, weight.B, weight.P, spec.a, spec.b)
        for Q in args.Q or [balanced.Q]:
            delta = args.delta if args.delta is not None else balanced.delta
            scheme = service.build_scheme(Q, min(max(delta, Q**-2), 1 / Q), args.N, spec.a, spec.b, spec.h)
            rows.append(service.comparison_row(spec, scheme, args.main_term))
    return Report.create("shifted-compare", config, rows, max_diff=max(row.diff for row in rows))
