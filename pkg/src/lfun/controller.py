from src.characters.service import character_by_label, primitive_characters
from src.coeffs.controller import source_arguments, source_from_args
from src.coeffs.service import DELTA_WEIGHT
from src.exceptions.lfun import LValueArgumentError
from src.lfun import service
from src.lfun.model import AmplifierSpec, LValueRequest, LValueRow, OmegaRow, SweepRow
from src.schemas.report import Report
from src.utils.router import CommandRouter, arg
from src.weights.service import make_interval_bump

router = CommandRouter(tags=["Twisted L-functions"])

value_arguments = [
    arg("--s-re", type=float, default=0.5, dest="s_re", help="Real part of s."),
    arg("--s-im", type=float, default=0.0, dest="s_im", help="Imaginary part of s."),
    arg("--cutoff", type=float, default=1.0, help="Splitting parameter A of the two incomplete-gamma sums."),
]


def _length_for(args, q_max: int) -> int:
    s = complex(args.s_re, args.s_im)
    return service.afe_length(q_max, 1, DELTA_WEIGHT, s, max(args.cutoff, 1 / args.cutoff, service.ALTERNATE_CUTOFF))


@router.command(
    "lvalue",
    help="L(s, φ⊗χ) by the approximate functional equation. CSV columns: label, q, s_re, s_im, L_re, L_im, "
    "L_abs, T_re, T_im, root_re, root_im, m_cut, cutoff_difference.",
    arguments=[
        *source_arguments(),
        arg("--chi", nargs="+", default=None, help="Characters as q:index labels."),
        arg("--q", type=int, nargs="+", default=None, help="Moduli; every primitive character of each."),
        *value_arguments,
        arg("--epsilon", type=float, default=0.1, help="Nominal length exponent: q^(1+ε)."),
        arg("--certify", action="store_true", help="Check the value against a second cutoff."),
        arg("--tolerance", type=float, default=1e-4, help="Largest accepted cutoff disagreement."),
    ],
)
def lvalue(args, config) -> Report[LValueRow]:
    characters = [character_by_label(label) for label in args.chi or []]
    for q in args.q or []:
        characters.extend(primitive_characters(q))
    if not characters:
        raise LValueArgumentError("give --chi labels or --q moduli")
    s = complex(args.s_re, args.s_im)
    phi = source_from_args(args, _length_for(args, max(chi.modulus for chi in characters)))

    rows = []
    for chi in characters:
        request = LValueRequest(s=s, phi=phi, chi=chi, epsilon=args.epsilon, cutoff=args.cutoff)
        difference = service.certify_afe(request, args.tolerance) if args.certify else None
        rows.append(LValueRow.from_result(service.afe_components(request), s, difference))
    return Report.create("lvalue", config, rows, count=len(rows))


@router.command(
    "amplify",
    help="The amplified second moment S with D(h) by two routes. CSV columns: label, amplifier, S_abs, S_re, "
    "S_im, contribution.",
    arguments=[
        *source_arguments(),
        arg("--chi", nargs="+", default=None, help="Target character as a q:index label."),
        arg("--L-amp", type=int, default=None, dest="L_amp", help="Amplifier length (default: the optimal one)."),
        arg("--M", type=float, default=8.0, help="Dyadic scale of k, supported on [M, 2M]."),
        arg("--steepness", type=float, default=1.0, help="Mollifier steepness of k."),
        arg("--shifted-route", action="store_true", dest="shifted_route", help="Recompute D(h) by shifted sums."),
        arg("--tolerance", type=float, default=1e-8, help="Relative tolerance of the identity checks."),
    ],
)
def amplify(args, config) -> Report[OmegaRow]:
    if not args.chi or len(args.chi) != 1:
        raise LValueArgumentError("amplify takes one target character", chi=args.chi)
    chi = character_by_label(args.chi[0])
    L_amp = args.L_amp or max(1, int(service.optimal_amplifier_length(chi.modulus, args.M)))
    phi = source_from_args(args, int(2 * args.M) + 2)
    spec = AmplifierSpec(phi=phi, chi=chi, L_amp=L_amp, M=args.M, k_weight=make_interval_bump(args.M, 2 * args.M, args.steepness))

    if args.shifted_route:
        moment, offdiagonal = service.check_amplifier_identities(spec, args.tolerance)
    else:
        moment = service.amplifier_moment(spec, args.threads)
        offdiagonal = service.amplifier_offdiagonal(spec, shifted_route=False)
    parseval = service.parseval_check(spec)
    return Report.create(
        "amplify",
        config,
        moment.rows,
        q=spec.q,
        L_amp=L_amp,
        M=spec.M,
        N=spec.N,
        S=moment.S,
        S_by_coefficients=service.moment_by_coefficients(spec),
        chi_term=moment.chi_term,
        gap_bound=moment.gap_bound,
        scale_ratio=moment.scale_ratio,
        D0=offdiagonal.D0,
        D0_squares=offdiagonal.D0_squares,
        orthogonality_rhs=offdiagonal.rhs,
        offdiagonal_scale=offdiagonal.scale,
        shifts=[row.model_dump() for row in offdiagonal.rows],
        parseval=parseval.model_dump(),
    )


@router.command(
    "sweep",
    help="max |L(s, φ⊗χ)| over primitive χ for prime powers q in a range, with the log-log slope. CSV columns: "
    "q, max_abs_L, argmax, sqrt_q, subconvex_scale.",
    arguments=[
        *source_arguments(),
        arg("--q-min", type=int, default=2, dest="q_min", help="Smallest modulus."),
        arg("--q-max", "--qmax", type=int, default=50, dest="q_max", help="Largest modulus."),
        *value_arguments,
    ],
)
def sweep(args, config) -> Report[SweepRow]:
    phi = source_from_args(args, _length_for(args, max(args.q_max, 1)))
    result = service.subconvexity_sweep(
        phi, range(args.q_min, args.q_max + 1), complex(args.s_re, args.s_im), args.cutoff, args.threads
    )
    return Report.create(
        "sweep",
        config,
        result.rows,
        slope=result.slope,
        intercept=result.intercept,
        ci_low=result.ci_low,
        ci_high=result.ci_high,
    )
