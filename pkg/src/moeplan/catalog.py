"""Typed hardware, model, and workload configuration with builtin defaults."""

from __future__ import annotations

import json
from collections.abc import Mapping
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any, Iterator, NamedTuple

GB = 1e9
GBPS = 1e9
TFLOPS = 1e12

_NODE_SIZES = (1, 2, 4, 8)

# 200 Gbps NICs per GPU, the provisioning of the reference clusters. Override
# per deployment in a config file.
DEFAULT_NET_BANDWIDTH = 25 * GBPS


class ConfigError(ValueError):
    """Malformed or invalid configuration input."""


@dataclass(frozen=True)
class GpuSpec:
    """One accelerator entry: capability, relative cost, and power.

    Units are raw SI: bytes, bytes/s, FLOP/s (bf16 dense), watts. Prices are
    dimensionless relative cost units; the planner only ever uses ratios, so
    rental prices work just as well. ``max_power`` is None when unknown, which
    excludes the entry from power-metric searches.
    """

    name: str
    price: float
    mem_capacity: float
    mem_bandwidth: float
    compute: float
    net_bandwidth_per_gpu: float = DEFAULT_NET_BANDWIDTH
    max_power: float | None = None
    max_gpus_per_node: int = 8

    def __post_init__(self):
        if not self.name:
            raise ConfigError("gpu: name must be non-empty")
        for attr in ("price", "mem_capacity", "mem_bandwidth", "compute",
                     "net_bandwidth_per_gpu"):
            if not getattr(self, attr) > 0:
                raise ConfigError(f"gpu {self.name!r}: {attr} must be > 0")
        if self.max_power is not None and not self.max_power > 0:
            raise ConfigError(f"gpu {self.name!r}: max_power must be > 0 or null")
        if self.max_gpus_per_node not in _NODE_SIZES:
            raise ConfigError(
                f"gpu {self.name!r}: max_gpus_per_node must be one of {_NODE_SIZES}"
            )


class Catalog(Mapping):
    """Immutable name-indexed set of GpuSpec entries (lookup is case-insensitive)."""

    def __init__(self, gpus: list[GpuSpec] | tuple[GpuSpec, ...]):
        entries: dict[str, GpuSpec] = {}
        for gpu in gpus:
            if gpu.name.lower() in {k.lower() for k in entries}:
                raise ConfigError(f"catalog: duplicate gpu name {gpu.name!r}")
            entries[gpu.name] = gpu
        if not entries:
            raise ConfigError("catalog: at least one gpu entry required")
        self._entries = entries

    def __getitem__(self, name: str) -> GpuSpec:
        if name in self._entries:
            return self._entries[name]
        lowered = name.lower()
        for key, gpu in self._entries.items():
            if key.lower() == lowered:
                return gpu
        raise KeyError(name)

    def __iter__(self) -> Iterator[str]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, Catalog) and self._entries == other._entries

    def __repr__(self) -> str:
        return f"Catalog({list(self._entries)})"


@dataclass(frozen=True)
class MoeModelSpec:
    """Mixture-of-experts architecture parameters.

    ``gqa_group`` is the number of query heads sharing one key/value head and
    is taken as given, never derived from a head size. ``bytes_per_param``
    defaults to 2 (bf16).
    """

    name: str
    layers: int
    hidden: int
    intermediate: int
    experts: int
    topk: int
    gqa_group: int = 8
    bytes_per_param: int = 2

    def __post_init__(self):
        for attr in ("layers", "hidden", "intermediate"):
            if not getattr(self, attr) > 0:
                raise ConfigError(f"model {self.name!r}: {attr} must be > 0")
        if not 1 <= self.topk <= self.experts:
            raise ConfigError(
                f"model {self.name!r}: K out of range (1 <= topk <= experts)"
            )
        if self.gqa_group < 1:
            raise ConfigError(f"model {self.name!r}: gqa_group must be >= 1")
        if self.bytes_per_param < 1:
            raise ConfigError(f"model {self.name!r}: bytes_per_param must be >= 1")


@dataclass(frozen=True)
class WorkloadSpec:
    """Traffic statistics and the latency target a plan must satisfy."""

    avg_seq_len: int = 730
    slo_tbt: float = 0.150
    input_len_median: int = 571
    output_len_median: int = 159

    def __post_init__(self):
        if not self.avg_seq_len > 0:
            raise ConfigError("workload: avg_seq_len must be > 0")
        if not self.slo_tbt > 0:
            raise ConfigError("workload: slo_tbt must be > 0")
        if self.input_len_median < 0 or self.output_len_median < 0:
            raise ConfigError("workload: median lengths must be >= 0")


_COST_METRICS = ("price", "power")


@dataclass(frozen=True)
class SearchLimits:
    """Search-space bounds for the deployment planner."""

    max_microbatches: int = 4
    cost_metric: str = "price"

    def __post_init__(self):
        if self.max_microbatches < 3:
            raise ConfigError("limits: max_microbatches must be >= 3")
        if self.cost_metric not in _COST_METRICS:
            raise ConfigError(
                f"limits: cost_metric must be one of {_COST_METRICS}"
            )


def builtin_catalog() -> Catalog:
    """Reference accelerator catalog. Prices are normalized so L20 = 1.00."""
    return Catalog([
        GpuSpec("L20", price=1.00, mem_capacity=48 * GB,
                mem_bandwidth=864 * GB, compute=119.5 * TFLOPS),
        GpuSpec("H800", price=5.28, mem_capacity=80 * GB,
                mem_bandwidth=3430.4 * GB, compute=989 * TFLOPS),
        GpuSpec("A800", price=2.26, mem_capacity=80 * GB,
                mem_bandwidth=2039 * GB, compute=312 * TFLOPS),
        GpuSpec("H20", price=1.85, mem_capacity=96 * GB,
                mem_bandwidth=4096 * GB, compute=148 * TFLOPS, max_power=500.0),
        GpuSpec("L40S", price=1.08, mem_capacity=48 * GB,
                mem_bandwidth=864 * GB, compute=362 * TFLOPS, max_power=350.0),
    ])


def builtin_models() -> dict[str, MoeModelSpec]:
    """Reference MoE configurations, keyed by model name."""
    models = [
        MoeModelSpec("Mixtral-8x22B", layers=56, hidden=6144,
                     intermediate=16384, experts=8, topk=2),
        MoeModelSpec("DBRX", layers=40, hidden=6144,
                     intermediate=10752, experts=16, topk=4),
        # Wider synthetic configuration with more experts.
        MoeModelSpec("Scaled-MoE", layers=48, hidden=8192,
                     intermediate=8192, experts=32, topk=4),
    ]
    return {m.name: m for m in models}


def resolve_model(name: str) -> MoeModelSpec:
    """Look up a builtin model by case-insensitive name."""
    models = builtin_models()
    for key, model in models.items():
        if key.lower() == name.lower():
            return model
    raise ConfigError(
        f"model: unknown builtin {name!r} (choices: {sorted(models)})"
    )


class ConfigBundle(NamedTuple):
    catalog: Catalog
    model: MoeModelSpec
    workload: WorkloadSpec
    limits: SearchLimits


_TOP_KEYS = ("hardware", "model", "workload", "limits")


def _check_keys(mapping: dict, allowed: tuple[str, ...], section: str) -> None:
    for key in mapping:
        if key not in allowed:
            raise ConfigError(f"{section}: unknown key {key!r}")


def _build(cls, raw: dict, section: str):
    allowed = tuple(f.name for f in fields(cls))
    _check_keys(raw, allowed, section)
    try:
        return cls(**raw)
    except TypeError as exc:
        raise ConfigError(f"{section}: {exc}") from exc


def config_from_dict(doc: dict) -> ConfigBundle:
    """Validate a parsed config document and fill documented defaults."""
    if not isinstance(doc, dict):
        raise ConfigError("config: top level must be a JSON object")
    _check_keys(doc, _TOP_KEYS, "config")

    hardware = doc.get("hardware")
    if hardware is None:
        catalog = builtin_catalog()
    else:
        if not isinstance(hardware, list) or not hardware:
            raise ConfigError("hardware: must be a non-empty array")
        catalog = Catalog([_build(GpuSpec, g, "hardware entry") for g in hardware])

    model_raw = doc.get("model")
    if model_raw is None:
        raise ConfigError("config: missing required key 'model'")
    if isinstance(model_raw, str):
        model = resolve_model(model_raw)
    elif isinstance(model_raw, dict):
        model = _build(MoeModelSpec, model_raw, "model")
    else:
        raise ConfigError("model: must be a builtin name or an object")

    workload = _build(WorkloadSpec, doc.get("workload", {}), "workload")
    limits = _build(SearchLimits, doc.get("limits", {}), "limits")
    return ConfigBundle(catalog, model, workload, limits)


def load_config(path: str | Path) -> ConfigBundle:
    """Load and validate a JSON config file.

    Raises ConfigError with line/field context on parse failures and with the
    violated invariant on validation failures.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"{path}: parse error at line {exc.lineno} column {exc.colno}: {exc.msg}"
        ) from exc
    return config_from_dict(doc)


def config_to_dict(bundle: ConfigBundle) -> dict[str, Any]:
    """Serialize a bundle back to the config-file schema (exact round trip)."""
    return {
        "hardware": [asdict(g) for g in bundle.catalog.values()],
        "model": asdict(bundle.model),
        "workload": asdict(bundle.workload),
        "limits": asdict(bundle.limits),
    }


def save_config(bundle: ConfigBundle, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_dict(bundle), indent=2) + "\n")
