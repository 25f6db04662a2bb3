"""Plain-text domain configs: one ``key = value`` per line, ``#`` comments.

Example::

    type = linear_image_ball
    dim = 2
    matrix = 1, 1, 0, 1
"""

from __future__ import annotations

import re

from .domains import (Ball, Domain, ExpProfileFamily, LinearImageBall, MixedQuasiReinhardt, Polydisk,
                      PolydiskDifference, ProfileDomain, PuncturedBall, QuasiCircularCubic,
                      TranslatedDiskProduct)
from .profile import ProfileError, parse_profile

KEYS = ("type", "dim", "radii", "matrix", "profile", "center", "k", "removed_point")

# which keys each type accepts besides ``type`` and ``dim``
ALLOWED = {
    "polydisk": {"radii"},
    "ball": {"radii"},
    "linear_image_ball": {"matrix"},
    "profile": {"profile"},
    "exp_profile": {"k"},
    "translated_disk_product": {"center", "radii"},
    "quasi_circular_cubic": set(),
    "mixed_quasi_reinhardt": set(),
    "polydisk_difference": {"radii"},
    "punctured_ball": {"radii", "removed_point"},
}

FIXED_DIM = {"profile": 2, "exp_profile": 2, "translated_disk_product": 2,
             "quasi_circular_cubic": 2, "mixed_quasi_reinhardt": 3}

_NUM = r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_REAL = re.compile(rf"[+-]?{_NUM}")
_IMAG = re.compile(rf"([+-]?)({_NUM})?i")
_BOTH = re.compile(rf"([+-]?{_NUM})([+-])({_NUM})?i")


class ConfigError(ValueError):
    """Malformed or inconsistent domain config."""


def parse_complex(text: str) -> complex:
    """``"a+bi"``, ``"a"``, ``"bi"``, ``"-i"`` and friends."""
    s = text.strip().replace(" ", "")
    if _REAL.fullmatch(s):
        return complex(float(s), 0.0)
    m = _IMAG.fullmatch(s)
    if m:
        return complex(0.0, float(m.group(1) + (m.group(2) or "1")))
    m = _BOTH.fullmatch(s)
    if m:
        return complex(float(m.group(1)), float(m.group(2) + (m.group(3) or "1")))
    raise ConfigError(f"not a complex number: {text!r}")


def _floats(text: str, key: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise ConfigError(f"{key}: expected comma-separated reals, got {text!r}") from None
    if any(v <= 0 for v in vals):
        raise ConfigError(f"{key}: entries must be positive")
    return vals


def _complexes(text: str) -> list[complex]:
    return [parse_complex(x) for x in text.split(",")]


def read_pairs(text: str) -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ConfigError(f"line {lineno}: empty value for {key!r}")
        out[key] = value
    return out


def parse_domain_config(text: str, k_override: int | None = None) -> Domain:
    """Build a domain from config text; ``k_override`` replaces the ``k`` key."""
    kv = read_pairs(text)
    kind = kv.get("type")
    if kind is None:
        raise ConfigError("missing key 'type'")
    if kind not in ALLOWED:
        raise ConfigError(f"unknown domain type {kind!r}")
    extra = set(kv) - {"type", "dim"} - ALLOWED[kind]
    if extra:
        raise ConfigError(f"key(s) {', '.join(sorted(extra))} not valid for type {kind!r}")
    dim = None
    if "dim" in kv:
        try:
            dim = int(kv["dim"])
        except ValueError:
            raise ConfigError(f"dim must be an integer, got {kv['dim']!r}") from None
        if dim < 1:
            raise ConfigError("dim must be at least 1")
    if kind in FIXED_DIM and dim not in (None, FIXED_DIM[kind]):
        raise ConfigError(f"type {kind!r} lives in dimension {FIXED_DIM[kind]}")

    def need(key):
        if key not in kv:
            raise ConfigError(f"type {kind!r} requires key {key!r}")
        return kv[key]

    try:
        return _build(kind, kv, dim, need, k_override)
    except ConfigError:
        raise
    except (ValueError, ProfileError) as exc:
        raise ConfigError(str(exc)) from exc


def _build(kind, kv, dim, need, k_override) -> Domain:
    if kind == "polydisk":
        radii = _floats(need("radii"), "radii")
        if dim is not None and len(radii) != dim:
            raise ConfigError("radii count does not match dim")
        return Polydisk(tuple(radii))
    if kind in ("ball", "punctured_ball"):
        radii = _floats(kv.get("radii", "1"), "radii")
        if len(radii) != 1:
            raise ConfigError("a ball takes a single radius")
        if kind == "ball":
            return Ball(radii[0], dim or 2)
        point = _complexes(need("removed_point"))
        n = dim or len(point)
        if len(point) != n:
            raise ConfigError("removed_point length does not match dim")
        return PuncturedBall(radii[0], n, tuple(point))
    if kind == "linear_image_ball":
        entries = _complexes(need("matrix"))
        n = dim or int(round(len(entries) ** 0.5))
        if n * n != len(entries):
            raise ConfigError(f"matrix needs {n}x{n} entries, got {len(entries)}")
        return LinearImageBall(tuple(tuple(entries[i * n:(i + 1) * n]) for i in range(n)))
    if kind == "profile":
        return ProfileDomain(parse_profile(need("profile")))
    if kind == "exp_profile":
        if k_override is not None:
            k = k_override
        else:
            try:
                k = int(need("k"))
            except ValueError:
                raise ConfigError(f"k must be an integer, got {kv['k']!r}") from None
        if k not in (0, 1):
            raise ConfigError("k must be 0 or 1")
        return ExpProfileFamily(k=k)
    if kind == "translated_disk_product":
        radii = _floats(kv.get("radii", "1, 1"), "radii")
        if len(radii) != 2:
            raise ConfigError("translated_disk_product takes two radii")
        return TranslatedDiskProduct(parse_complex(need("center")), radii[0], radii[1])
    if kind == "quasi_circular_cubic":
        return QuasiCircularCubic()
    if kind == "mixed_quasi_reinhardt":
        return MixedQuasiReinhardt()
    # polydisk_difference: "outer; inner"
    parts = need("radii").split(";")
    if len(parts) != 2:
        raise ConfigError("polydisk_difference radii must read 'outer radii; inner radii'")
    outer, inner = (_floats(p, "radii") for p in parts)
    if len(outer) != len(inner) or (dim is not None and len(outer) != dim):
        raise ConfigError("outer and inner radii must both have dim entries")
    return PolydiskDifference(tuple(outer), tuple(inner))


def load_domain_config(path: str, k_override: int | None = None) -> tuple[Domain, bytes]:
    """Read and parse a config file; returns the domain and the raw bytes (for hashing)."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc.strerror}") from exc
    try:
        text = raw.decode("utf-8")
    except UnicodeDecodeError:
        raise ConfigError(f"config {path!r} is not UTF-8 text") from None
    return parse_domain_config(text, k_override), raw
