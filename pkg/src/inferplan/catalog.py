"""File-backed registry of GPU and model specifications.

Catalogs are plain INI files (one section per record, ``key = value``
entries), one file for GPUs and one for models, so operators can edit
prices and add hardware without touching code. Loaded catalogs are
immutable and safe to share across concurrent planner requests.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field, fields
from importlib import resources


class CatalogError(Exception):
    """Raised when a catalog file cannot be parsed or validated."""


@dataclass(frozen=True)
class HardwareSpec:
    """One GPU type: compute, memory, interconnect and price."""

    name: str
    peak_compute: float  # FLOP/s
    memory_capacity: float  # bytes
    memory_bandwidth: float  # bytes/s
    comm_bandwidth: float  # bytes/s, inter-GPU
    comm_latency: float  # seconds per message
    unit_price: float  # currency units, operator-editable

    def __post_init__(self):
        for f in fields(self):
            if f.name == "name":
                continue
            value = getattr(self, f.name)
            if not value > 0:
                raise CatalogError(
                    f"gpu {self.name!r}: field {f.name!r} must be strictly positive, got {value}"
                )


@dataclass(frozen=True)
class ModelSpec:
    """Transformer decoder architecture plus storage precisions."""

    name: str
    num_layers: int
    hidden_size: int
    num_heads: int
    num_kv_heads: int
    ffn_size: int
    vocab_size: int
    weight_bytes: int  # bytes per parameter
    kv_bytes: int  # bytes per cached K or V element
    param_count_override: int | None = None  # pin published counts

    def __post_init__(self):
        positive = (
            "num_layers", "hidden_size", "num_heads", "num_kv_heads",
            "ffn_size", "vocab_size", "weight_bytes", "kv_bytes",
        )
        for name in positive:
            value = getattr(self, name)
            if not value > 0:
                raise CatalogError(
                    f"model {self.name!r}: field {name!r} must be strictly positive, got {value}"
                )
        if self.num_heads % self.num_kv_heads != 0:
            raise CatalogError(
                f"model {self.name!r}: num_kv_heads ({self.num_kv_heads}) must divide "
                f"num_heads ({self.num_heads})"
            )
        if self.hidden_size % self.num_heads != 0:
            raise CatalogError(
                f"model {self.name!r}: hidden_size ({self.hidden_size}) must be divisible "
                f"by num_heads ({self.num_heads})"
            )
        if self.param_count_override is not None and self.param_count_override <= 0:
            raise CatalogError(
                f"model {self.name!r}: param_count_override must be positive"
            )

    @property
    def kv_hidden_size(self) -> int:
        """Hidden width of the K/V projections; equals hidden_size for MHA."""
        return (self.hidden_size // self.num_heads) * self.num_kv_heads


@dataclass(frozen=True)
class Catalog:
    """Immutable set of hardware and model records, keyed by name."""

    gpus: dict[str, HardwareSpec] = field(default_factory=dict)
    models: dict[str, ModelSpec] = field(default_factory=dict)

    def gpu(self, name: str) -> HardwareSpec:
        try:
            return self.gpus[name]
        except KeyError:
            raise CatalogError(f"unknown gpu {name!r}") from None

    def model(self, name: str) -> ModelSpec:
        try:
            return self.models[name]
        except KeyError:
            raise CatalogError(f"unknown model {name!r}") from None


def model_param_count(m: ModelSpec) -> int:
    """Total parameters: the pinned override if present, else a dense
    decoder estimate V*H + N*(4*H^2 + 2*H*I)."""
    if m.param_count_override is not None:
        return m.param_count_override
    h, i = m.hidden_size, m.ffn_size
    return m.vocab_size * h + m.num_layers * (4 * h * h + 2 * h * i)


def model_weight_bytes(m: ModelSpec) -> int:
    """Bytes to hold the full weight set at the model's precision."""
    return model_param_count(m) * m.weight_bytes


_GPU_FIELDS = {
    "peak_compute": float,
    "memory_capacity": float,
    "memory_bandwidth": float,
    "comm_bandwidth": float,
    "comm_latency": float,
    "unit_price": float,
}

_MODEL_FIELDS = {
    "num_layers": int,
    "hidden_size": int,
    "num_heads": int,
    "num_kv_heads": int,
    "ffn_size": int,
    "vocab_size": int,
    "weight_bytes": int,
    "kv_bytes": int,
}


def _read_ini(text: str, path: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(
        strict=True, interpolation=None, inline_comment_prefixes=("#",)
    )
    try:
        parser.read_string(text, source=path)
    except configparser.DuplicateSectionError as exc:
        raise CatalogError(
            f"{path}: duplicate record {exc.section!r} (line {exc.lineno})"
        ) from exc
    except configparser.Error as exc:
        raise CatalogError(f"{path}: {exc}") from exc
    return parser


def _record_values(parser: configparser.ConfigParser, section: str,
                   schema: dict, path: str) -> dict:
    raw = parser[section]
    values = {}
    for key, cast in schema.items():
        if key not in raw:
            raise CatalogError(f"{path}: record {section!r} is missing field {key!r}")
        try:
            number = float(raw[key])
        except ValueError:
            raise CatalogError(
                f"{path}: record {section!r} field {key!r}: not a number: {raw[key]!r}"
            ) from None
        if cast is int:
            if number != int(number):
                raise CatalogError(
                    f"{path}: record {section!r} field {key!r}: expected an integer, "
                    f"got {raw[key]!r}"
                )
            number = int(number)
        values[key] = number
    known = set(schema) | {"param_count"}
    for key in raw:
        if key not in known:
            raise CatalogError(f"{path}: record {section!r} has unknown field {key!r}")
    return values


def parse_gpu_file(text: str, path: str = "<gpus>") -> dict[str, HardwareSpec]:
    parser = _read_ini(text, path)
    gpus = {}
    for section in parser.sections():
        values = _record_values(parser, section, _GPU_FIELDS, path)
        gpus[section] = HardwareSpec(name=section, **values)
    return gpus


def parse_model_file(text: str, path: str = "<models>") -> dict[str, ModelSpec]:
    parser = _read_ini(text, path)
    models = {}
    for section in parser.sections():
        values = _record_values(parser, section, _MODEL_FIELDS, path)
        override = None
        if parser.has_option(section, "param_count"):
            raw = parser[section]["param_count"]
            try:
                override = int(float(raw))
            except ValueError:
                raise CatalogError(
                    f"{path}: record {section!r} field 'param_count': not a number: {raw!r}"
                ) from None
        models[section] = ModelSpec(name=section, param_count_override=override, **values)
    return models


def load_catalog(gpus_path: str, models_path: str) -> Catalog:
    """Load and validate both catalog files.

    Raises CatalogError naming the file, record and field on any parse
    failure, duplicate name or invariant violation.
    """
    with open(gpus_path, encoding="utf-8") as fh:
        gpus = parse_gpu_file(fh.read(), gpus_path)
    with open(models_path, encoding="utf-8") as fh:
        models = parse_model_file(fh.read(), models_path)
    if not gpus:
        raise CatalogError(f"{gpus_path}: catalog contains no GPU records")
    if not models:
        raise CatalogError(f"{models_path}: catalog contains no model records")
    return Catalog(gpus=gpus, models=models)


def _format_number(value) -> str:
    if isinstance(value, int):
        return str(value)
    return repr(value)


def serialize_gpus(gpus: dict[str, HardwareSpec]) -> str:
    parser = configparser.ConfigParser(interpolation=None)
    for name, gpu in gpus.items():
        parser[name] = {key: _format_number(getattr(gpu, key)) for key in _GPU_FIELDS}
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()


def serialize_models(models: dict[str, ModelSpec]) -> str:
    parser = configparser.ConfigParser(interpolation=None)
    for name, m in models.items():
        record = {key: _format_number(getattr(m, key)) for key in _MODEL_FIELDS}
        if m.param_count_override is not None:
            record["param_count"] = str(m.param_count_override)
        parser[name] = record
    out = io.StringIO()
    parser.write(out)
    return out.getvalue()


def default_catalog() -> Catalog:
    """Catalog seeded from the packaged data files."""
    data = resources.files("inferplan") / "data"
    gpus = parse_gpu_file((data / "gpus.cfg").read_text(encoding="utf-8"), "data/gpus.cfg")
    models = parse_model_file(
        (data / "models.cfg").read_text(encoding="utf-8"), "data/models.cfg"
    )
    return Catalog(gpus=gpus, models=models)
