"""
JSON export functionality.
"""

from pydantic import BaseModel


def export_json(report: BaseModel, indent: int = 2) -> str:
    """
    Export a report model to a JSON string.

    Args:
        report: SolveReport, VerificationReport or StudyResult
        indent: Number of spaces for indentation (default: 2)

    Returns:
        JSON string
    """
    return report.model_dump_json(indent=indent)


def export_json_dict(report: BaseModel) -> dict:
    """Export a report model to a JSON-compatible dictionary."""
    return report.model_dump(mode="json")
