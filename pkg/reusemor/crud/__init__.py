"""File persistence: Matrix Market matrices and CSV reports."""
