"""
Run configuration: INI file, environment and command-line flags, in
increasing order of precedence.

The INI file has a ``[wp]`` section for scalar settings and an optional
``[constants]`` section::

    [wp]
    budget = 14
    convention = half
    seed = 7

    [constants]
    c12 = 2.5
"""
import configparser
import os
from dataclasses import asdict, dataclass, field

from .errors import ContractViolation
from .moments import DEFAULT_CONSTANTS

TABLE_ENV = "WP_TABLE_PATH"


@dataclass
class RunConfig:
    budget: int = 14
    v11_convention: str = "half"
    constants: dict = field(default_factory=lambda: dict(DEFAULT_CONSTANTS))
    precision: int = 120
    output: str = ""
    format: str = "csv"
    seed: int = 0
    threads: int = 1
    table_path: str = ""

    def __post_init__(self):
        self.validate()

    def validate(self):
        if int(self.budget) < 3:
            raise ContractViolation("budget must be at least 3")
        if self.v11_convention not in ("half", "full"):
            raise ContractViolation("convention must be half or full")
        if int(self.precision) < 64:
            raise ContractViolation("precision must be at least 64 bits")
        if self.format not in ("csv", "json"):
            raise ContractViolation("format must be csv or json")
        if int(self.threads) < 1:
            raise ContractViolation("threads must be positive")
        for k, v in self.constants.items():
            if not float(v) > 0:
                raise ContractViolation(f"constant {k} must be positive")

    def snapshot(self):
        # threads and output location do not influence any value, so they are
        # left out and reports stay byte-identical across them
        d = asdict(self)
        del d["threads"], d["output"]
        d["constants"] = dict(sorted(self.constants.items()))
        return d


_KEYS = {"budget": int, "convention": str, "precision": int, "output": str,
         "format": str, "seed": int, "threads": int, "table_path": str}


def load_config(path=None, overrides=None, environ=None):
    """
    Build a :class:`RunConfig` from ``path`` (INI), the environment and
    ``overrides`` (a dict of flag values; ``None`` entries are ignored).
    """
    environ = os.environ if environ is None else environ
    values = {}
    constants = dict(DEFAULT_CONSTANTS)
    if environ.get(TABLE_ENV):
        values["table_path"] = environ[TABLE_ENV]
    if path:
        parser = configparser.ConfigParser()
        if not parser.read(path):
            raise ContractViolation(f"cannot read config file {path}")
        if parser.has_section("wp"):
            for key, raw in parser.items("wp"):
                if key not in _KEYS:
                    raise ContractViolation(f"unknown config key {key!r}")
                values[key] = _KEYS[key](raw)
        if parser.has_section("constants"):
            for key, raw in parser.items("constants"):
                constants[key] = float(raw)
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "constants":
            constants.update(value)
        else:
            values[key] = value
    if "convention" in values:
        values["v11_convention"] = values.pop("convention")
    return RunConfig(constants=constants, **values)
