# keeps the tests directory importable so modules can share oracles.py
