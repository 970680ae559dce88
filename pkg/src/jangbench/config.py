"""Run configuration: strict ``key = value`` sections, validated before any numerics."""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

AUTO = "auto"

# section -> key -> (kind, default); kind in real, int, bool, str, reals, choice:<a|b>
SCHEMA: dict = {
    "data": {
        "kind": ("choice:synthetic|schwarzschild|tabulated", "synthetic"),
        "b": ("real", 1.0),
        "l": ("real", 3.0),
        "c0": ("real", 1.0),
        "r_h": ("real", 1.0),
        "collar": ("real", 0.1),
        "r_max": ("real", 1000.0),
        "outer_knn": ("real", -2.0),
        "m": ("real", 1.0),
        "f_choice": ("choice:zero|inv_r", "inv_r"),
        "r_in": ("real_or_auto", AUTO),
        "r_out": ("real", 100.0),
        "path": ("str", ""),
        "c_rate": ("real", 1.0),
        "rate_condition": ("choice:none|upper|two_sided", "none"),
    },
    "grid": {
        "n": ("int", 2000),
        "h_min": ("real_or_auto", AUTO),
        "tau_min": ("real_or_auto", AUTO),
    },
    "solver": {
        "epsilon": ("real", 0.0),
        "delta": ("real", 0.0),
        "source_mode": ("choice:none|eps_f|eps_f_minus_chi", "none"),
        "extend": ("bool", False),
        "bc_inner": ("real_or_auto", AUTO),
        "bc_outer": ("real", 0.0),
        "init": ("choice:linear|zero", "zero"),
        "tol": ("real", 1e-10),
        "max_iter": ("int", 50),
        "backend": ("choice:auto|cython|python", "auto"),
    },
    "continuation": {
        "family": ("int", 1),
        "eps_start": ("real", 1.0),
        "eps_stop": ("real", 1e-6),
        "eps_ratio": ("real", 0.5),
        "delta_schedule": ("reals", (1e-2, 1e-3, 1e-4, 1e-5)),
        "delta_schedule_family2": ("reals", (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)),
        "sigma0": ("real", 0.05),
        "vartheta": ("real", 1.0),
        "eps_stage": ("bool", True),
        "max_iter": ("int", 200),
    },
    "barrier": {
        "role": ("choice:sub|super", "sub"),
        "family": ("int", 1),
        "tau0": ("real", 0.1),
        "n_points": ("int", 10000),
        "decades": ("real", 8.0),
    },
    "fit": {
        "profile": ("str", ""),
        "tau0": ("real", 0.1),
        "delta": ("real", 0.0),
    },
    "sweep": {
        "b_values": ("reals", (0.0, 0.5, 0.75, 1.0)),
        "l_values": ("reals", (3.0,)),
        "workers": ("int", 1),
    },
    "output": {
        "dir": ("str", "out"),
        "run_id": ("str", "run"),
    },
}


@dataclass
class RunConfig:
    """Validated configuration with every default materialized."""

    values: dict
    base_dir: Path = field(default_factory=Path.cwd)
    present: set = field(default_factory=set)

    def __getitem__(self, section: str) -> dict:
        return self.values[section]

    def path(self, rel: str) -> Path:
        """Resolve a path relative to the config file's directory."""
        p = Path(rel)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def out_dir(self) -> Path:
        return self.path(self.values["output"]["dir"])

    def echo(self) -> str:
        """Fully-defaulted config text (deterministic)."""
        lines = []
        for sec, keys in SCHEMA.items():
            lines.append(f"[{sec}]")
            for key, (kind, _) in keys.items():
                lines.append(f"{key} = {_render(kind, self.values[sec][key])}")
            lines.append("")
        return "\n".join(lines)

    def write_echo(self, out_dir: Path) -> Path:
        out_dir.mkdir(parents=True, exist_ok=True)
        p = out_dir / "config.ini"
        with p.open("w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.echo())
        return p


def _render(kind, v) -> str:
    if kind == "bool":
        return "true" if v else "false"
    if kind == "reals":
        return ", ".join(format(x, ".12g") for x in v)
    if kind in ("real", "real_or_auto") and not isinstance(v, str):
        return format(v, ".12g")
    return str(v)


def _real(sec, key, text) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"[{sec}] {key}: expected a decimal real, got {text!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"[{sec}] {key}: must be finite")
    return v


def _convert(sec, key, kind, text):
    text = text.strip()
    if kind == "real":
        return _real(sec, key, text)
    if kind == "real_or_auto":
        return AUTO if text == AUTO else _real(sec, key, text)
    if kind == "int":
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"[{sec}] {key}: expected an integer, got {text!r}") from None
    if kind == "bool":
        if text not in ("true", "false"):
            raise ConfigError(f"[{sec}] {key}: expected true or false, got {text!r}")
        return text == "true"
    if kind == "reals":
        parts = [p for p in (s.strip() for s in text.split(",")) if p]
        if not parts:
            raise ConfigError(f"[{sec}] {key}: empty list")
        return tuple(_real(sec, key, p) for p in parts)
    if kind.startswith("choice:"):
        opts = kind[7:].split("|")
        if text not in opts:
            raise ConfigError(f"[{sec}] {key}: expected one of {', '.join(opts)}, got {text!r}")
        return text
    return text


def parse_config(text: str, base_dir=None) -> RunConfig:
    """Parse and validate config text.  Unknown sections/keys and duplicates are errors."""
    cp = configparser.ConfigParser(strict=True, interpolation=None, inline_comment_prefixes=("#",),
                                   comment_prefixes=("#",), empty_lines_in_values=False)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ConfigError(f"line {exc.lineno}: duplicate key {exc.option!r} in [{exc.section}]") from None
    except configparser.DuplicateSectionError as exc:
        raise ConfigError(f"line {exc.lineno}: duplicate section [{exc.section}]") from None
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError(f"line {exc.lineno}: key outside any [section]") from None
    except configparser.ParsingError as exc:
        lines = ", ".join(str(ln) for ln, _ in exc.errors)
        raise ConfigError(f"syntax error at line {lines}") from None
    values = {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in SCHEMA.items()}
    present = set()
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")
        present.add(sec)
        for key, raw in cp.items(sec):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"[{sec}] unknown key {key!r}")
            values[sec][key] = _convert(sec, key, SCHEMA[sec][key][0], raw)
    cfg = RunConfig(values, Path(base_dir) if base_dir is not None else Path.cwd(), present)
    validate(cfg)
    return cfg


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, base_dir=path.resolve().parent)


def validate(cfg: RunConfig) -> None:
    d, g, s, c = cfg["data"], cfg["grid"], cfg["solver"], cfg["continuation"]
    if d["kind"] == "tabulated" and not d["path"]:
        raise ConfigError("[data] kind = tabulated needs path")
    if d["b"] < 0 or d["l"] < 1:
        raise ConfigError("[data] needs b >= 0 and l >= 1")
    if g["n"] < 64:
        raise ConfigError("[grid] n must be >= 64")
    for key in ("h_min", "tau_min"):
        if g[key] != AUTO and not g[key] > 0:
            raise ConfigError(f"[grid] {key} must be positive")
    if s["epsilon"] < 0 or s["delta"] < 0:
        raise ConfigError("[solver] epsilon and delta must be >= 0")
    if s["source_mode"] == "eps_f_minus_chi":
        raise ConfigError("[solver] source_mode eps_f_minus_chi is set up by the family-2 continuation")
    if s["max_iter"] < 1 or c["max_iter"] < 1:
        raise ConfigError("max_iter must be >= 1")
    if not (0 < c["eps_stop"] <= c["eps_start"]) or not (0 < c["eps_ratio"] < 1):
        raise ConfigError("[continuation] needs 0 < eps_stop <= eps_start and 0 < eps_ratio < 1")
    for key in ("delta_schedule", "delta_schedule_family2"):
        ds = c[key]
        if any(v <= 0 for v in ds) or any(b2 >= b1 for b1, b2 in zip(ds, ds[1:])):
            raise ConfigError(f"[continuation] {key} must be positive and decreasing")
    if c["sigma0"] <= 0 or c["vartheta"] <= 0:
        raise ConfigError("[continuation] sigma0 and vartheta must be positive")
    if c["family"] not in (1, 2) or cfg["barrier"]["family"] not in (1, 2):
        raise ConfigError("family must be 1 or 2")
    if cfg["barrier"]["n_points"] < 10 or cfg["barrier"]["tau0"] <= 0:
        raise ConfigError("[barrier] needs n_points >= 10 and tau0 > 0")
    if cfg["sweep"]["workers"] < 1:
        raise ConfigError("[sweep] workers must be >= 1")
    if "continuation" in cfg.present and d["kind"] != "schwarzschild":
        check_regime_config(d["b"], d["l"], c["family"])


def check_regime_config(b: float, l: float, family: int) -> None:
    tol = 1e-12
    if family == 1 and not (-(l - 1) / 2 - tol <= b < (l + 1) / 2 - tol):
        raise ConfigError(f"family 1 requires -(l-1)/2 <= b < (l+1)/2 (got b = {b:g}, l = {l:g})")
    if family == 2 and not (0.5 - tol <= b < (l + 1) / 2 - tol):
        raise ConfigError(f"family 2 requires 1/2 ≤ b < (l+1)/2 (got b = {b:g}, l = {l:g})")
