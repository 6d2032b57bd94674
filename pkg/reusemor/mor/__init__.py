"""Model order reduction drivers (AIRGA, BIRKA, QB-IHOMM) and their helpers."""
