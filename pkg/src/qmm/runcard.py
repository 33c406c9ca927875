"""Run cards: small ``key = value`` documents with ``[section]`` headers.

A card fixes one simulation together with its output options::

    # phase 1 of the (2,2) model
    [run]
    model = qmm22
    a = 1.73
    t_end_in_a = 2600

    [couplings]
    lambda_im = 6.111
    mu_hat = 0.592
    b_kicker_y = 2.75

    [output]
    windows = 0:50, 2550:2600

    [expect]
    label = P1

Unknown sections and keys are rejected with the offending line number.
Omitted run keys take the :class:`~qmm.integrator.RunConfig` defaults
(``dt_in_a = 1/200``, ``engine = rk4_delay``, ``representation = cartesian``).
The ``[expect]`` section is informational: it records the label (and
optionally the transition) a card is meant to reproduce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .errors import ValidationError
from .hamiltonians import CouplingSet
from .integrator import RunConfig
from .observables import PhaseLabel

#: CSV column order; the last two only exist for two-delay models.
SERIES_COLUMNS = ("t", "theta", "phi", "psi_up", "re_psi_down", "im_psi_down", "w2_at")
TWO_DELAY_COLUMNS = ("w2_bt", "w2_ab")
PLOTTABLE = SERIES_COLUMNS[1:] + TWO_DELAY_COLUMNS

_RUN_KEYS = {"model", "a", "theta0", "phi0", "t_end_in_a", "r", "dt_in_a", "engine", "representation"}
_COUPLING_KEYS = {f.name for f in fields(CouplingSet)} - {"b_ext"} | {"mu_hat", "b_x", "b_y", "b_z"}
_OUTPUT_KEYS = {"decimation", "windows", "plots", "columns"}
_EXPECT_KEYS = {"label", "transition", "transition_in_a"}
_SWEEP_KEYS = {"axis1", "axis2"}
SECTIONS = {"run": _RUN_KEYS, "couplings": _COUPLING_KEYS, "output": _OUTPUT_KEYS,
            "expect": _EXPECT_KEYS, "sweep": _SWEEP_KEYS}

Window = tuple[float, float]


@dataclass(frozen=True)
class Expectation:
    label: Optional[PhaseLabel] = None
    transition: Optional[tuple[PhaseLabel, PhaseLabel]] = None
    transition_in_a: Optional[Window] = None


@dataclass(frozen=True)
class SweepAxis:
    name: str
    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise ValidationError(f"sweep axis {self.name!r} needs at least one value")


@dataclass(frozen=True)
class RunCard:
    """A validated card: the run itself plus output options."""

    config: RunConfig
    windows: tuple[Window, ...] = ()
    plots: tuple[str, ...] = ("w2_at", "psi_up", "re_psi_down")
    columns: Optional[tuple[str, ...]] = None
    expect: Expectation = field(default_factory=Expectation)
    axes: tuple[SweepAxis, ...] = ()
    name: str = ""

    @property
    def series_columns(self) -> tuple[str, ...]:
        """CSV columns for this card, in the fixed order."""
        full = SERIES_COLUMNS + (TWO_DELAY_COLUMNS if self.config.model == "qmm33" else ())
        if self.columns is None:
            return full
        return tuple(c for c in full if c in self.columns)


class _Entry:
    __slots__ = ("value", "line")

    def __init__(self, value: str, line: int):
        self.value = value
        self.line = line


def _fail(source: str, line: int, message: str) -> ValidationError:
    return ValidationError(f"{source}:{line}: {message}")


def _tokenise(text: str, source: str) -> dict[str, dict[str, _Entry]]:
    doc: dict[str, dict[str, _Entry]] = {}
    section: Optional[str] = None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise _fail(source, number, f"malformed section header {raw.strip()!r}")
            section = line[1:-1].strip().lower()
            if section not in SECTIONS:
                raise _fail(source, number, f"unknown section [{section}]; expected one of "
                                            f"{sorted(SECTIONS)}")
            if section in doc:
                raise _fail(source, number, f"section [{section}] appears twice")
            doc[section] = {}
            continue
        if "=" not in line:
            raise _fail(source, number, f"expected 'key = value', got {raw.strip()!r}")
        if section is None:
            raise _fail(source, number, "key outside of any [section]")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in SECTIONS[section]:
            raise _fail(source, number, f"unknown key {key!r} in [{section}]; allowed: "
                                        f"{sorted(SECTIONS[section])}")
        if key in doc[section]:
            raise _fail(source, number, f"duplicate key {key!r}")
        if not value:
            raise _fail(source, number, f"empty value for {key!r}")
        doc[section][key] = _Entry(value, number)
    return doc


def _number(entry: _Entry, key: str, source: str) -> float:
    """A float; ``p/q`` fractions are accepted so ``dt_in_a = 1/200`` reads naturally."""
    text = entry.value
    try:
        value = float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise _fail(source, entry.line, f"{key} must be a number, got {text!r}") from None
    if not math.isfinite(value):
        raise _fail(source, entry.line, f"{key} must be finite")
    return value


def _label(text: str, entry: _Entry, source: str) -> PhaseLabel:
    text = text.strip()
    for lab in PhaseLabel:
        if text in (lab.value, lab.short):
            return lab
    raise _fail(source, entry.line, f"unknown phase label {text!r}")


def parse_window(text: str) -> Window:
    """``"lo:hi"`` in units of ``a``."""
    try:
        lo, hi = (float(s) for s in text.split(":"))
    except ValueError:
        raise ValidationError(f"window {text!r} must look like 'start:end'") from None
    if not (math.isfinite(lo) and math.isfinite(hi) and 0 <= lo < hi):
        raise ValidationError(f"window {text!r} needs 0 ≤ start < end")
    return lo, hi


def parse_values(text: str) -> tuple[float, ...]:
    """Comma separated numbers, or ``start:stop:count`` for an evenly spaced grid."""
    text = text.strip()
    try:
        if ":" in text and "," not in text:
            lo, hi, n = text.split(":")
            count = int(n)
            if count < 1:
                raise ValueError
            return tuple(float(v) for v in np.linspace(float(lo), float(hi), count))
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ValidationError(f"cannot read sweep values from {text!r}") from None


def parse_axis(text: str) -> SweepAxis:
    """``"name: values"`` or ``"name=values"``."""
    for sep in ("=", " "):
        if sep in text:
            name, values = text.split(sep, 1)
            break
    else:
        raise ValidationError(f"sweep axis {text!r} must look like 'name=v1,v2,...'")
    name = name.strip().rstrip(":").strip()
    return SweepAxis(name, parse_values(values.strip().lstrip(":")))


def parse_run_card(text: str, source: str = "<card>") -> RunCard:
    doc = _tokenise(text, source)
    run = doc.get("run", {})
    if "model" not in run:
        raise ValidationError(f"{source}: [run] must set 'model'")
    if "a" not in run:
        raise ValidationError(f"{source}: [run] must set 'a'")

    kwargs: dict[str, Union[str, float]] = {}
    for key, entry in run.items():
        if key in ("model", "engine", "representation"):
            kwargs[key] = entry.value.lower()
        else:
            kwargs[key] = _number(entry, key, source)

    coup = doc.get("couplings", {})
    cvals = {k: _number(e, k, source) for k, e in coup.items()}
    if "mu_hat" in cvals:
        if "mu" in cvals:
            raise _fail(source, coup["mu_hat"].line, "give either mu or mu_hat, not both")
        cvals["mu"] = cvals.pop("mu_hat") - cvals.get("lambda_re", 0.0)
    b_ext = tuple(cvals.pop(k, 0.0) for k in ("b_x", "b_y", "b_z"))
    couplings = CouplingSet(b_ext=b_ext, **cvals)

    out = doc.get("output", {})
    if "decimation" in out:
        dec = _number(out["decimation"], "decimation", source)
        if dec != int(dec) or dec < 1:
            raise _fail(source, out["decimation"].line, "decimation must be a positive integer")
        kwargs["decimation"] = int(dec)
    try:
        cfg = RunConfig(couplings=couplings, **kwargs)
    except ValidationError as exc:
        raise ValidationError(f"{source}: {exc}") from None

    windows: tuple[Window, ...] = ()
    if "windows" in out:
        try:
            windows = tuple(parse_window(w) for w in out["windows"].value.split(","))
        except ValidationError as exc:
            raise _fail(source, out["windows"].line, str(exc)) from None
        for lo, hi in windows:
            if hi > cfg.t_end_in_a:
                raise _fail(source, out["windows"].line,
                            f"window {lo:g}:{hi:g} ends after t_end_in_a = {cfg.t_end_in_a:g}")
    plots = ("w2_at", "psi_up", "re_psi_down")
    if "plots" in out:
        plots = tuple(p.strip() for p in out["plots"].value.split(","))
        bad = [p for p in plots if p not in PLOTTABLE]
        if bad:
            raise _fail(source, out["plots"].line, f"cannot plot {bad}; choose from {list(PLOTTABLE)}")
    columns = None
    if "columns" in out:
        columns = tuple(c.strip() for c in out["columns"].value.split(","))
        allowed = SERIES_COLUMNS + TWO_DELAY_COLUMNS
        bad = [c for c in columns if c not in allowed]
        if bad:
            raise _fail(source, out["columns"].line, f"unknown columns {bad}; choose from {list(allowed)}")
        if "t" not in columns:
            raise _fail(source, out["columns"].line, "columns must include 't'")

    exp = doc.get("expect", {})
    label = _label(exp["label"].value, exp["label"], source) if "label" in exp else None
    transition = None
    if "transition" in exp:
        entry = exp["transition"]
        parts = entry.value.replace("→", "->").split("->")
        if len(parts) != 2:
            raise _fail(source, entry.line, "transition must look like 'P5 -> P1'")
        transition = (_label(parts[0], entry, source), _label(parts[1], entry, source))
    t_window = None
    if "transition_in_a" in exp:
        try:
            t_window = parse_window(exp["transition_in_a"].value)
        except ValidationError as exc:
            raise _fail(source, exp["transition_in_a"].line, str(exc)) from None

    axes = []
    for key in ("axis1", "axis2"):
        if key in doc.get("sweep", {}):
            entry = doc["sweep"][key]
            try:
                axes.append(parse_axis(entry.value))
            except ValidationError as exc:
                raise _fail(source, entry.line, str(exc)) from None

    return RunCard(cfg, windows, plots, columns, Expectation(label, transition, t_window),
                   tuple(axes), name=Path(source).stem)


def load_run_card(path: Union[str, Path]) -> RunCard:
    """Read and validate a card file; a bare name resolves to a shipped card."""
    p = Path(path)
    if not p.exists() and p.suffix == "" and p.name == str(path):
        shipped = resources.files("qmm") / "cards" / f"{path}.card"
        if shipped.is_file():
            return parse_run_card(shipped.read_text(encoding="utf-8"), f"{path}.card")
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read card {str(path)!r}: {exc.strerror or exc}") from None
    return parse_run_card(text, str(p))


def shipped_cards() -> dict[str, RunCard]:
    """Every card bundled with the package, keyed by file stem."""
    folder = resources.files("qmm") / "cards"
    out = {}
    for entry in sorted(folder.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".card"):
            out[entry.name[:-5]] = parse_run_card(entry.read_text(encoding="utf-8"), entry.name)
    return out
