"""
CSV export for convergence study tables.
"""

import csv
import io

from discrete_uniformization.core.constants import STUDY_COLUMNS
from discrete_uniformization.core.models import StudyResult


def format_float(value: float) -> str:
    """Full-precision float (17 significant digits, '.' decimal)."""
    return format(value, ".17g")


def export_study_csv(result: StudyResult) -> str:
    """
    Export a study as CSV with header ``resolution,h,error,residual,runtime_ms``.

    Args:
        result: Study result to export

    Returns:
        CSV string
    """
    output = io.StringIO()
    writer = csv.writer(output, lineterminator="\n")
    writer.writerow(STUDY_COLUMNS)
    for row in result.rows:
        writer.writerow([
            row.resolution,
            format_float(row.h),
            format_float(row.error),
            format_float(row.residual),
            format_float(row.runtime_ms),
        ])
    return output.getvalue()
