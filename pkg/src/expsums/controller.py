from src.expsums import service
from src.expsums.model import WeilRow
from src.schemas.report import Report
from src.utils.router import CommandRouter, arg

router = CommandRouter(tags=["Exponential sums"])


@router.command(
    "kloosterman-scan",
    help="Check the Weil-Estermann bound for twisted Kloosterman sums over all q ≤ q_max.",
    arguments=[
        arg("--q-max", "--qmax", type=int, default=300, dest="q_max", help="Largest modulus (default: 300)."),
        arg("--per-character", action="store_true", dest="per_character", help="Emit one row per character."),
    ],
)
def kloosterman_scan(args, config) -> Report[WeilRow]:
    result = service.scan_weil(args.q_max, threads=args.threads, per_character_rows=args.per_character)
    return Report.create(
        "kloosterman-scan",
        config,
        result.rows,
        q_max=result.q_max,
        sample_size=result.sample_size,
        sums_checked=result.sums_checked,
        max_ratio=result.max_ratio,
        witness=result.witness.model_dump() if result.witness else None,
    )
