"""
On-disk storage for volume tables.

One header line records the format and the V_{1,1} convention; every entry
line carries a CRC32 of its payload::

    # wp-systole volume-table v1 convention=half
    g n crc32 rep=coefficient;rep=coefficient;...

Orbit representatives are written as comma-separated exponents and
coefficients as ``p/q``. Writes go to a temporary file in the same directory
followed by :func:`os.replace`, so a reader never sees a half-written table.
Entries whose checksum or syntax fails are dropped with a warning.
"""
import os
import tempfile
import warnings
import zlib

from .errors import ConventionMismatch
from .exact_algebra import Rational

HEADER = "# wp-systole volume-table v1 convention="


def _encode(entry):
    parts = []
    for rep in sorted(entry):
        c = entry[rep]
        parts.append(",".join(str(a) for a in rep) + "=" + f"{c.numerator}/{c.denominator}")
    return ";".join(parts)


def _decode(payload):
    entry = {}
    for item in payload.split(";"):
        key, value = item.split("=")
        rep = tuple(int(a) for a in key.split(",")) if key else ()
        num, den = value.split("/")
        entry[rep] = Rational(int(num), int(den))
    return entry


def read_table_entries(path, convention):
    """
    Return ``{(g, n): compressed entry}`` from ``path``.

    A missing or empty file gives an empty table. A header naming another
    convention raises :class:`ConventionMismatch`.
    """
    if not path or not os.path.exists(path):
        return {}
    with open(path, encoding="ascii") as fh:
        lines = fh.read().splitlines()
    if not lines:
        return {}
    if not lines[0].startswith(HEADER):
        warnings.warn(f"{path}: unrecognized header; table ignored")
        return {}
    stored = lines[0][len(HEADER):].strip()
    if stored != convention:
        raise ConventionMismatch(
            f"{path} was written with convention {stored!r}, requested {convention!r}")
    out = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        try:
            g, n, crc, payload = line.split(" ", 3)
            if int(crc, 16) != zlib.crc32(payload.encode("ascii")):
                raise ValueError("checksum mismatch")
            out[(int(g), int(n))] = _decode(payload)
        except (ValueError, ZeroDivisionError) as exc:
            warnings.warn(f"{path}:{lineno}: corrupt entry dropped ({exc})")
    return out


def write_table(table, path):
    """Atomically write every entry of ``table`` to ``path``."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    lines = [HEADER + table.convention]
    for g, n in table.keys():
        payload = _encode(table.lookup(g, n))
        lines.append(f"{g} {n} {zlib.crc32(payload.encode('ascii')):08x} {payload}")
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".wp-table-")
    try:
        with os.fdopen(fd, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_save_table(path, budget=14, convention="half"):
    """
    A :class:`VolumeTable` backed by ``path``: existing entries are loaded and
    new ones are saved as they are computed. An empty path gives an in-memory table.
    """
    from .volumes import VolumeTable
    return VolumeTable(budget=budget, convention=convention, path=path or None)
