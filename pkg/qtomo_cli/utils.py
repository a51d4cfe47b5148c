from __future__ import annotations

import hashlib
import math
import re
from fractions import Fraction
from pathlib import Path
from typing import List, Tuple

from .errors import ConfigError


def safe_slug(s: str) -> str:
    s = s.strip().lower()
    s = re.sub(r"[^a-z0-9]+", "_", s)
    s = re.sub(r"_+", "_", s).strip("_")
    return s or "run"


def run_key(name: str, resolved: str) -> str:
    """Directory name for one run: slug of the scenario name plus a short hash of its resolved config."""
    slug = safe_slug(name)
    h = hashlib.sha1(resolved.encode("utf-8")).hexdigest()[:8]
    return f"{slug}_{h}"


def ensure_dir(p: Path) -> None:
    p.mkdir(parents=True, exist_ok=True)


def write_text(p: Path, text: str) -> None:
    ensure_dir(p.parent)
    with p.open("w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def read_text(path: Path) -> str:
    data = path.read_bytes()
    for enc in ("utf-8", "utf-8-sig", "cp1252", "latin-1"):
        try:
            return data.decode(enc)
        except UnicodeDecodeError:
            continue
    return data.decode("latin-1", errors="replace")


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def fmt_float(x: float) -> str:
    """9 significant digits; negative zero is written as 0."""
    if x != x:
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = format(float(x), ".9g")
    return "0" if s in ("-0", "0") else s


def parse_float_list(text: str) -> List[float]:
    """Comma, space or semicolon separated numbers; fractions such as 1/3 are accepted."""
    parts = [p for p in re.split(r"[,\s;]+", (text or "").strip()) if p]
    try:
        return [float(Fraction(p)) for p in parts]
    except (ValueError, ZeroDivisionError) as e:
        raise ConfigError(f"Invalid number list '{text}': {e}") from e


def parse_range(text: str) -> Tuple[float, float]:
    """Parses 'a:b' or 'a,b' into an ordered pair."""
    vals = parse_float_list((text or "").replace(":", ","))
    if len(vals) != 2 or not vals[0] < vals[1]:
        raise ConfigError(f"Invalid range '{text}'. Expected 'min:max' with min < max")
    return vals[0], vals[1]
