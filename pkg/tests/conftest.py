# keeps the tests directory importable for shared helpers
