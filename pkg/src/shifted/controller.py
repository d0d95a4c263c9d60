from math import ceil

from src.coeffs.controller import source_arguments, source_from_args
from src.coeffs.service import contragredient
from src.schemas.report import Report
from src.shifted import service
from src.shifted.model import ShiftedRow, ShiftedSumSpec
from src.utils.router import CommandRouter, arg
from src.weights.service import make_box_weight

router = CommandRouter(tags=["Shifted convolution sums"])


def spec_arguments() -> list:
    return [
        arg("--a", type=int, default=1, help="Coefficient a of am ± bn = h."),
        arg("--b", type=int, default=1, help="Coefficient b, coprime to a."),
        arg("--h", type=int, default=1, help="Shift h ≥ 1."),
        arg("--A", type=float, nargs="+", default=[100.0], help="Box scales A; one row per value."),
        arg("--B", type=float, default=None, help="Box scale B (default: the row's A)."),
        arg("--P", type=float, default=1.0, help="Oscillation parameter P ≥ 1."),
        arg("--steepness", type=float, default=1.0, help="Mollifier steepness of the box weight."),
        arg("--main-term", action="store_true", dest="main_term", help="Add the divisor main term."),
    ]


def build_specs(args, sign: int = -1) -> list[ShiftedSumSpec]:
    """One spec per box scale A, all sharing one coefficient source."""
    largest = max(max(args.A), args.B or 0)
    source = source_from_args(args, int(ceil(2 * largest)) + 2)
    specs = []
    for A in args.A:
        weight = make_box_weight(A, args.B or A, args.P, args.steepness)
        specs.append(
            ShiftedSumSpec(a=args.a, b=args.b, h=args.h, sign=sign, phi=source, psi=contragredient(source), weight=weight)
        )
    return specs


@router.command(
    "shifted-sum",
    help="Evaluate D_f(a, b; h) on box weights against the trivial bound and the power-saving scale. CSV columns: a, b, h, sign, "
    "X, Y, P, D, D_im, trivial_bound, th1_scale, ratio_trivial, ratio_th1, supersedes_trivial, main_term, "
    "main_term_gap.",
    arguments=[
        *source_arguments(),
        *spec_arguments(),
        arg("--sign", type=int, choices=[1, -1], default=-1, help="Sign in am ± bn = h."),
    ],
)
def shifted_sum(args, config) -> Report[ShiftedRow]:
    sweep = service.shifted_sweep(build_specs(args, args.sign), args.main_term, args.threads)
    return Report.create(
        "shifted-sum",
        config,
        sweep.rows,
        max_ratio_th1=max(row.ratio_th1 for row in sweep.rows),
        max_ratio_trivial=max(row.ratio_trivial for row in sweep.rows),
    )
