from src.coeffs import service
from src.exceptions.coeffs import CoefficientArgumentError
from src.schemas.report import Report
from src.utils.router import CommandRouter, arg

router = CommandRouter(tags=["Coefficients"])

FORMS = service.BUILTIN_FORMS


def _describe(source) -> dict:
    rs_at = min(source.m_max, 1000)
    deligne = service.deligne_check(source)
    return {
        "kind": source.kind.value,
        "level": source.level,
        "weight": source.weight,
        "mu": source.mu,
        "m_max": source.m_max,
        "rankin_selberg_ratio": service.rankin_selberg_ratio(source, rs_at),
        "rankin_selberg_x": rs_at,
        "deligne_max_ratio": deligne.max_ratio,
        "deligne_argmax": deligne.argmax,
    }


@router.command(
    "coeffs-gen",
    help="Generate a coefficient file (coef v1) for Δ or the divisor analog.",
    arguments=[
        arg("--form", choices=sorted(FORMS), required=True, help="Coefficient source to generate."),
        arg("--mmax", type=int, required=True, dest="m_max", help="Number of coefficients."),
        arg("--out", required=True, dest="coef_path", help="Path of the coefficient file to write."),
    ],
)
def generate(args, config) -> Report[dict]:
    if args.m_max < 1:
        raise CoefficientArgumentError(f"--mmax must be positive, got {args.m_max}", m_max=args.m_max)
    source = FORMS[args.form](args.m_max)
    service.export_coefficients(source, args.coef_path)
    return Report.create("coeffs-gen", config, [_describe(source)], path=str(args.coef_path))


@router.command(
    "coeffs-validate",
    help="Parse and validate a coefficient file, reporting Rankin-Selberg and Deligne diagnostics.",
    arguments=[arg("path", help="Coefficient file to validate.")],
)
def validate(args, config) -> Report[dict]:
    source = service.load_coefficients(args.path)
    return Report.create("coeffs-validate", config, [_describe(source)], path=str(args.path))


def source_arguments(default_form: str | None = "delta") -> list:
    """--form/--coef/--mmax, shared by every command that reads a coefficient source."""
    return [
        arg("--form", choices=sorted(FORMS), default=default_form, help="Built-in coefficient source."),
        arg("--coef", default=None, help="Coefficient file to use instead of a built-in source."),
        arg("--mmax", type=int, default=None, dest="m_max", help="Coefficients to generate for a built-in source."),
    ]


def source_from_args(args, m_needed: int):
    form = None if args.coef else args.form
    return service.resolve_source(form, args.coef, args.m_max or m_needed)
