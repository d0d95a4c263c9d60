from src.characters import service
from src.characters.model import CharacterRow, CharacterSummary
from src.schemas.report import Report
from src.utils.router import CommandRouter, arg

router = CommandRouter(tags=["Characters"])


@router.command(
    "characters",
    help="List the Dirichlet characters mod q with conductors and Gauss sums.",
    arguments=[
        arg("--q", type=int, required=True, help="Modulus q ≥ 1."),
        arg("--primitive-only", action="store_true", help="Keep primitive characters only."),
    ],
)
def list_characters(args, config) -> Report[CharacterRow]:
    characters = service.primitive_characters(args.q) if args.primitive_only else service.enumerate_characters(args.q)
    rows = []
    for chi in characters:
        tau = service.gauss_sum(chi)
        rows.append(
            CharacterRow(
                label=chi.label,
                conductor=chi.conductor,
                is_primitive=chi.is_primitive,
                is_principal=chi.is_principal,
                parity=chi.parity(),
                gauss_sum_re=tau.real,
                gauss_sum_im=tau.imag,
                gauss_sum_abs=abs(tau),
            )
        )
    summary = CharacterSummary(
        modulus=args.q,
        count=len(rows),
        primitive_count=sum(row.is_primitive for row in rows),
        rows=rows,
    )
    return Report.create("characters", config, summary.rows, **summary.model_dump(exclude={"rows"}))
