"""Persistence of posterior draws and output artifacts."""

from .base import SampleStore
from .csv_store import CsvSampleStore, read_json, write_csv, write_json

__all__ = ["SampleStore", "CsvSampleStore", "read_json", "write_csv", "write_json"]
