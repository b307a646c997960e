"""The exception the dumper raises for bad inputs, specs, or checkpoints."""


class DumpError(Exception):
    pass
