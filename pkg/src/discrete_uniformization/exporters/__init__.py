"""
Output formatters for reports and study tables.
"""

from discrete_uniformization.exporters.csv import export_study_csv
from discrete_uniformization.exporters.json import export_json, export_json_dict

__all__ = [
    # JSON
    "export_json",
    "export_json_dict",
    # CSV
    "export_study_csv",
]
