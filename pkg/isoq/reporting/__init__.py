"""
Result records and reporting utilities.
"""

from .records import GoldenResult, golden_check, load_record, read_csv, write_csv, write_json, write_record
from .summary import SummaryGenerator
from .tables import TableGenerator

__all__ = [
    "GoldenResult",
    "golden_check",
    "load_record",
    "read_csv",
    "write_csv",
    "write_json",
    "write_record",
    "SummaryGenerator",
    "TableGenerator",
]
