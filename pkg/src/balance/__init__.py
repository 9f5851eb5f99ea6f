# Balance errors and correction refeed
from src.balance.ledger import (
    BalanceError,
    BalanceLedger,
    ClosureReport,
    CorrectionEntry,
    CorrectionPolicy,
    EntryKind,
    closure_report,
    correction_at,
    schedule,
    schedule_switch_part,
    split_error,
    step_error,
)

__all__ = [
    "BalanceError",
    "BalanceLedger",
    "ClosureReport",
    "CorrectionEntry",
    "CorrectionPolicy",
    "EntryKind",
    "closure_report",
    "correction_at",
    "schedule",
    "schedule_switch_part",
    "split_error",
    "step_error",
]
