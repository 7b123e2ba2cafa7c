"""Scenario files: an INI document describing one simulation request.

Sections and keys (``#`` starts a comment line)::

    [pair]          j1, j2 (e.g. 1/2, 1, 3/2), lambda
    [driver]        kind = rabi        -> omega_perp, omega_rot, omega_0
                    kind = lz          -> delta, alpha   (or gamma, alpha)
                    kind = constant    -> value = wx, wy, wz
                    kind = tabulated   -> file = fields.csv  (relative to the scenario)
                                          or data = one "t, wx, wy, wz" row per line
    [time]          t0, t1, and either points (uniform grid) or times = t_0, t_1, ...
                    for an lz driver t0 = t1 = auto picks a symmetric window
    [initial]       state = stretched | flipped | m-pair | psi_plus | psi_minus | custom
                    m1, m2 for m-pair (default |j1, j2 - 1>);
                    vector = c_1, c_2, ... for custom (Python complex literals)
    [observables]   names = Jz, j1z, j2z, J2, joint_inversion, pop:<target>
                    targets: stretched, flipped, psi_plus, psi_minus, or m1;m2
    [noise]         sigma_sq = sx, sy, sz and inv_corr_time     (optional)
    [ensemble]      trajectories, seed, path_step, workers, method (needed with noise)
    [integration]   rel_tol, abs_tol, max_step                  (optional)

Any problem is reported as :class:`ScenarioError` with the line and column of
the offending value.
"""

from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .coupling import SpinPair
from .fields import Constant, FieldDriver, LandauZener, Rabi, Tabulated
from .integrator import IntegrationConfig
from .noise import EnsembleConfig, NoiseModel
from .su2 import HalfInt, SpinDomainError, check_projection

INITIAL_KINDS = ("stretched", "flipped", "m-pair", "psi_plus", "psi_minus", "custom")
BASE_OBSERVABLES = ("Jz", "j1z", "j2z", "J2", "joint_inversion")
POP_TARGETS = ("stretched", "flipped", "psi_plus", "psi_minus")


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int = 0, column: int = 0, source: str = "<scenario>"):
        loc = f"{source}:{line}:{column}" if line else source
        super().__init__(f"{loc}: {message}")
        self.line, self.column = line, column


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    t1: float
    points: int = 2
    explicit: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        if not self.t0 < self.t1:
            raise SpinDomainError(f"need t0 < t1, got [{self.t0}, {self.t1}]")
        if self.explicit is not None:
            g = np.asarray(self.explicit, dtype=float)
            if g.size == 0 or np.any(np.diff(g) <= 0) or g[0] < self.t0 or g[-1] > self.t1:
                raise SpinDomainError("times must be strictly ascending inside [t0, t1]")
        elif self.points < 1:
            raise SpinDomainError("points must be >= 1")

    def values(self) -> np.ndarray:
        if self.explicit is not None:
            return np.asarray(self.explicit, dtype=float)
        if self.points == 1:
            return np.array([self.t1])
        return np.linspace(self.t0, self.t1, self.points)


@dataclass(frozen=True)
class InitialSpec:
    kind: str = "stretched"
    m1: Optional[HalfInt] = None
    m2: Optional[HalfInt] = None
    vector: Optional[tuple[complex, ...]] = None

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise SpinDomainError(f"unknown initial state {self.kind!r}; known: {', '.join(INITIAL_KINDS)}")
        if self.kind == "custom":
            if not self.vector:
                raise SpinDomainError("custom initial state needs a vector")
            norm = math.sqrt(sum(abs(c) ** 2 for c in self.vector))
            if abs(norm - 1) > 1e-10:
                raise SpinDomainError(f"custom vector must be normalised (norm {norm:.12g})")


@dataclass(frozen=True)
class Scenario:
    pair: SpinPair
    driver: FieldDriver
    time: TimeGrid
    initial: InitialSpec = InitialSpec()
    observables: tuple[str, ...] = ("Jz",)
    noise: Optional[NoiseModel] = None
    ensemble: Optional[EnsembleConfig] = None
    integration: IntegrationConfig = field(default_factory=IntegrationConfig)

    def __post_init__(self):
        if not self.observables:
            raise SpinDomainError("the observable list is empty")
        for name in self.observables:
            check_observable(self.pair, name)
        if self.initial.kind == "custom" and len(self.initial.vector) != self.pair.dim:
            raise SpinDomainError(f"custom vector needs {self.pair.dim} components")
        if self.initial.kind == "m-pair":
            check_projection(self.pair.j1, self.initial.m1)
            check_projection(self.pair.j2, self.initial.m2)
        if self.noise is not None and self.ensemble is None:
            raise SpinDomainError("a noise model needs an [ensemble] section")
        if self.ensemble is not None and self.noise is None:
            raise SpinDomainError("an [ensemble] section needs a noise model")
        if self.ensemble is not None:
            self.ensemble.step_for(self.noise)


def check_observable(pair: SpinPair, name: str) -> None:
    if name in BASE_OBSERVABLES:
        return
    if name.startswith("pop:"):
        target = name[4:]
        if target in POP_TARGETS:
            return
        parts = target.split(";")
        if len(parts) == 2:
            check_projection(pair.j1, parts[0])
            check_projection(pair.j2, parts[1])
            return
    raise SpinDomainError(f"unknown observable {name!r}")


def lz_window(driver: LandauZener, noise: Optional[NoiseModel] = None) -> float:
    """Half-width ``T`` of the sweep window ``[-T, T]``.

    Without noise the finite-window error in the transition probability decays
    like ``1/(sqrt(alpha) T)``; 200 sweep units keep it near 1e-3. Noise acts
    while ``alpha |t|`` is within a few ``Lambda``, so the window also spans
    40 ``Lambda / alpha``.
    """
    a = driver.alpha
    t = max(200 / math.sqrt(a), 20 * abs(driver.delta) / a)
    if noise is not None:
        t = max(t, 40 * noise.inv_corr_time / a)
    return t


# --- parsing ---------------------------------------------------------------------


class _Doc:
    """ConfigParser plus the source position of every key's value."""

    def __init__(self, text: str, source: str):
        self.source = source
        self.cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
        self.cp.optionxform = str
        try:
            self.cp.read_string(text, source=source)
        except configparser.MissingSectionHeaderError as exc:
            raise ScenarioError("expected a [section] header", exc.lineno, 1, source) from None
        except configparser.ParsingError as exc:
            line = exc.errors[0][0] if exc.errors else 0
            raise ScenarioError("malformed line", line, 1, source) from None
        except (configparser.DuplicateOptionError, configparser.DuplicateSectionError) as exc:
            raise ScenarioError(exc.message.split(": ", 1)[-1], exc.lineno or 0, 1, source) from None
        self.pos: dict[tuple[str, str], tuple[int, int]] = {}
        self.section_line: dict[str, int] = {}
        section = None
        key_re = re.compile(r"^(\s*)([^=:\s][^=:]*?)\s*[=:]\s*")
        for n, raw in enumerate(text.splitlines(), 1):
            stripped = raw.strip()
            if stripped.startswith("[") and stripped.endswith("]"):
                section = stripped[1:-1].strip()
                self.section_line[section] = n
                continue
            if section is None or not stripped or stripped[0] in "#;" or raw[:1].isspace():
                continue
            m = key_re.match(raw)
            if m:
                self.pos[(section, m.group(2))] = (n, m.end() + 1)

    def error(self, section: str, key: Optional[str], message: str) -> ScenarioError:
        if key is not None and (section, key) in self.pos:
            line, col = self.pos[(section, key)]
        else:
            line, col = self.section_line.get(section, 0), 1
        return ScenarioError(f"[{section}] {key + ': ' if key else ''}{message}", line, col, self.source)

    def has(self, section: str, key: Optional[str] = None) -> bool:
        return self.cp.has_section(section) and (key is None or self.cp.has_option(section, key))

    def raw(self, section: str, key: str, default=None):
        if not self.has(section):
            if default is not None:
                return default
            raise ScenarioError(f"missing section [{section}]", 0, 0, self.source)
        if not self.cp.has_option(section, key):
            if default is not None:
                return default
            raise self.error(section, None, f"missing key {key!r}")
        return self.cp.get(section, key).strip()

    def convert(self, section: str, key: str, fn, default=None):
        value = self.raw(section, key, default)
        if value is default and default is not None and not self.has(section, key):
            return default
        try:
            return fn(value)
        except (ValueError, TypeError, ZeroDivisionError, SpinDomainError) as exc:
            raise self.error(section, key, str(exc) or f"bad value {value!r}") from None

    def check_keys(self, section: str, allowed) -> None:
        if not self.has(section):
            return
        for key in self.cp.options(section):
            if key not in allowed:
                raise self.error(section, key, f"unknown key (allowed: {', '.join(allowed)})")


def _floats(text: str, n: Optional[int] = None) -> tuple[float, ...]:
    vals = tuple(float(x) for x in text.replace(",", " ").split())
    if n is not None and len(vals) != n:
        raise ValueError(f"expected {n} numbers, got {len(vals)}")
    return vals


def _complexes(text: str) -> tuple[complex, ...]:
    return tuple(complex(x.replace(" ", "")) for x in text.split(","))


def _finite(x: str) -> float:
    v = float(x)
    if not math.isfinite(v):
        raise ValueError(f"expected a finite number, got {x!r}")
    return v


SECTIONS = {
    "pair": ("j1", "j2", "lambda"),
    "driver": ("kind", "omega_perp", "omega_rot", "omega_0", "delta", "alpha", "gamma", "value", "file", "data"),
    "time": ("t0", "t1", "points", "times"),
    "initial": ("state", "m1", "m2", "vector"),
    "observables": ("names",),
    "noise": ("sigma_sq", "inv_corr_time"),
    "ensemble": ("trajectories", "seed", "path_step", "workers", "method"),
    "integration": ("rel_tol", "abs_tol", "max_step"),
}


def _driver(doc: _Doc, base: Path) -> FieldDriver:
    kind = doc.raw("driver", "kind")
    num = lambda k, d=None: doc.convert("driver", k, _finite, d)  # noqa: E731
    try:
        if kind == "rabi":
            return Rabi(num("omega_perp"), num("omega_rot"), num("omega_0"))
        if kind == "lz":
            alpha = num("alpha")
            if doc.has("driver", "gamma"):
                if doc.has("driver", "delta"):
                    raise doc.error("driver", "gamma", "give either delta or gamma, not both")
                return LandauZener.from_gamma(num("gamma"), alpha)
            return LandauZener(num("delta"), alpha)
        if kind == "constant":
            return Constant(doc.convert("driver", "value", lambda s: _floats(s, 3)))
        if kind == "tabulated":
            if doc.has("driver", "file"):
                path = base / doc.raw("driver", "file")
                try:
                    return Tabulated.from_csv(path)
                except (OSError, ValueError) as exc:
                    raise doc.error("driver", "file", str(exc)) from None
            rows = doc.convert("driver", "data",
                               lambda s: [_floats(r, 4) for r in s.splitlines() if r.strip()])
            arr = np.array(rows)
            return Tabulated(arr[:, 0], arr[:, 1:])
    except ValueError as exc:
        if isinstance(exc, ScenarioError):
            raise
        raise doc.error("driver", None, str(exc)) from None
    raise doc.error("driver", "kind", f"unknown driver kind {kind!r} (rabi, lz, constant, tabulated)")


def parse_scenario(text: str, source: str = "<scenario>", base_dir=".") -> Scenario:
    doc = _Doc(text, source)
    for name in doc.cp.sections():
        if name not in SECTIONS:
            raise doc.error(name, None, "unknown section")
        doc.check_keys(name, SECTIONS[name])

    j1 = doc.convert("pair", "j1", HalfInt.of)
    j2 = doc.convert("pair", "j2", HalfInt.of)
    lam = doc.convert("pair", "lambda", _finite, 0.0)
    try:
        pair = SpinPair(j1, j2, lam)
    except SpinDomainError as exc:
        raise doc.error("pair", None, str(exc)) from None

    driver = _driver(doc, Path(base_dir))

    noise = None
    if doc.has("noise"):
        try:
            noise = NoiseModel(doc.convert("noise", "sigma_sq", lambda s: _floats(s, 3)),
                               doc.convert("noise", "inv_corr_time", _finite))
        except SpinDomainError as exc:
            raise doc.error("noise", None, str(exc)) from None

    auto = [k for k in ("t0", "t1") if doc.raw("time", k, "") == "auto"]
    if auto:
        if not isinstance(driver, LandauZener) or len(auto) != 2:
            raise doc.error("time", auto[0], "auto window needs an lz driver and t0 = t1 = auto")
        half = lz_window(driver, noise)
        t0, t1 = -half, half
    else:
        t0, t1 = doc.convert("time", "t0", _finite), doc.convert("time", "t1", _finite)
    try:
        if doc.has("time", "times"):
            if doc.has("time", "points"):
                raise doc.error("time", "points", "give either points or times, not both")
            grid = TimeGrid(t0, t1, explicit=doc.convert("time", "times", _floats))
        else:
            grid = TimeGrid(t0, t1, doc.convert("time", "points", int, 2))
    except SpinDomainError as exc:
        raise doc.error("time", None, str(exc)) from None

    kind = doc.raw("initial", "state", "stretched")
    try:
        if kind == "m-pair":
            m1 = doc.convert("initial", "m1", lambda x: check_projection(pair.j1, x), pair.j1)
            m2 = doc.convert("initial", "m2", lambda x: check_projection(pair.j2, x), pair.j2 - 1)
            initial = InitialSpec(kind, m1, m2)
        elif kind == "custom":
            initial = InitialSpec(kind, vector=doc.convert("initial", "vector", _complexes))
        else:
            initial = InitialSpec(kind)
    except SpinDomainError as exc:
        raise doc.error("initial", "state" if kind not in INITIAL_KINDS else None, str(exc)) from None

    names = doc.convert("observables", "names", lambda s: tuple(x.strip() for x in s.split(",") if x.strip()))
    if not names:
        raise doc.error("observables", "names", "the observable list is empty")
    for n in names:
        try:
            check_observable(pair, n)
        except SpinDomainError as exc:
            raise doc.error("observables", "names", str(exc)) from None

    ensemble = None
    if doc.has("ensemble"):
        try:
            ensemble = EnsembleConfig(
                doc.convert("ensemble", "trajectories", int),
                doc.convert("ensemble", "seed", int, 0),
                doc.convert("ensemble", "path_step", _finite) if doc.has("ensemble", "path_step") else None,
                doc.convert("ensemble", "workers", int, 1),
                doc.raw("ensemble", "method", "magnus"),
            )
        except SpinDomainError as exc:
            raise doc.error("ensemble", None, str(exc)) from None

    cfg = IntegrationConfig()
    if doc.has("integration"):
        try:
            cfg = IntegrationConfig(
                doc.convert("integration", "rel_tol", _finite, cfg.rel_tol),
                doc.convert("integration", "abs_tol", _finite, cfg.abs_tol),
                doc.convert("integration", "max_step", float, cfg.max_step),
            )
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise doc.error("integration", None, str(exc)) from None

    try:
        return Scenario(pair, driver, grid, initial, names, noise, ensemble, cfg)
    except SpinDomainError as exc:
        section = "ensemble" if "ensemble" in str(exc) or "noise" in str(exc) else "initial"
        raise doc.error(section, None, str(exc)) from None


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario: {exc.strerror}", source=str(path)) from None
    return parse_scenario(text, str(path), path.parent)


# --- emitting --------------------------------------------------------------------


def _num(x: float) -> str:
    return repr(float(x))


def _nums(xs) -> str:
    return ", ".join(_num(x) for x in xs)


def emit_scenario(s: Scenario) -> str:
    """Serialise a scenario; ``parse_scenario(emit_scenario(s)) == s``."""
    out = ["[pair]", f"j1 = {s.pair.j1}", f"j2 = {s.pair.j2}", f"lambda = {_num(s.pair.lam)}", "", "[driver]"]
    d = s.driver
    if isinstance(d, Rabi):
        out += ["kind = rabi", f"omega_perp = {_num(d.omega_perp)}", f"omega_rot = {_num(d.omega_rot)}",
                f"omega_0 = {_num(d.omega_0)}"]
    elif isinstance(d, LandauZener):
        out += ["kind = lz", f"delta = {_num(d.delta)}", f"alpha = {_num(d.alpha)}"]
    elif isinstance(d, Constant):
        out += ["kind = constant", f"value = {_nums(d.value)}"]
    else:
        out += ["kind = tabulated", "data ="]
        out += [f"    {_nums([t, *row])}" for t, row in zip(d.times, d.samples)]
    g = s.time
    out += ["", "[time]", f"t0 = {_num(g.t0)}", f"t1 = {_num(g.t1)}"]
    out.append(f"times = {_nums(g.explicit)}" if g.explicit is not None else f"points = {g.points}")
    out += ["", "[initial]", f"state = {s.initial.kind}"]
    if s.initial.kind == "m-pair":
        out += [f"m1 = {s.initial.m1}", f"m2 = {s.initial.m2}"]
    elif s.initial.kind == "custom":
        out.append("vector = " + ", ".join(repr(complex(c)) for c in s.initial.vector))
    out += ["", "[observables]", "names = " + ", ".join(s.observables)]
    if s.noise is not None:
        out += ["", "[noise]", f"sigma_sq = {_nums(s.noise.sigma_sq)}",
                f"inv_corr_time = {_num(s.noise.inv_corr_time)}"]
    if s.ensemble is not None:
        e = s.ensemble
        out += ["", "[ensemble]", f"trajectories = {e.n_trajectories}", f"seed = {e.master_seed}"]
        if e.path_step is not None:
            out.append(f"path_step = {_num(e.path_step)}")
        out += [f"workers = {e.workers}", f"method = {e.method}"]
    c = s.integration
    out += ["", "[integration]", f"rel_tol = {_num(c.rel_tol)}", f"abs_tol = {_num(c.abs_tol)}",
            f"max_step = {_num(c.max_step)}"]
    return "\n".join(out) + "\n"


FAST_NOISE_FACTOR = 8.0


def noisy_lz_scenario(gamma: float, theta: float, n_trajectories: int, seed: int = 0, alpha: float = 1.0,
                      initial: str = "stretched", fast_factor: float = FAST_NOISE_FACTOR,
                      lam: float = 0.0, workers: int = 1, axes: str = "xy",
                      observables: tuple[str, ...] = ("pop:stretched", "pop:psi_plus", "pop:flipped")) -> Scenario:
    """Two spin-1/2's swept through the crossing with transverse OU noise.

    ``Lambda = fast_factor * max(sqrt(alpha), delta)``; only the final time is
    recorded. ``axes`` is passed to :meth:`NoiseModel.transverse`.
    """
    driver = LandauZener.from_gamma(gamma, alpha)
    lam_noise = fast_factor * max(math.sqrt(alpha), driver.delta)
    noise = NoiseModel.transverse(theta, alpha, lam_noise, axes)
    half = lz_window(driver, noise)
    return Scenario(
        SpinPair(HalfInt(1), HalfInt(1), lam),
        driver,
        TimeGrid(-half, half, 1),
        InitialSpec(initial),
        tuple(observables),
        noise,
        EnsembleConfig(n_trajectories, seed, workers=workers),
    )
