"""Reader for starkcool result CSVs (the plotting front end is not built here)."""

from .dialect import SchemaError, Table, read_table

__all__ = ["SchemaError", "Table", "read_table"]
