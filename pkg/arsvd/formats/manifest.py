"""JSON model manifest and model save/load over the ARTN container."""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np
import voluptuous as vol

from ..compress import LowRankFactors
from ..const import (
    CONTAINER_SUFFIX,
    LAYER_KIND_DENSE,
    LAYER_KIND_FACTORED,
    MANIFEST_FORMAT,
    MANIFEST_SUFFIX,
    MANIFEST_VERSION,
)
from ..exceptions import ArsvdIOError, ContractViolationError, ManifestError
from ..network.graph import ModelGraph
from ..network.layers import Activation, DenseLayer, FactoredLayer, Layer
from .container import read_container, write_container

_LOGGER = logging.getLogger(__name__)

SHAPE = vol.All([vol.All(int, vol.Range(min=1))], vol.Length(min=2, max=2))

DENSE_LAYER_SCHEMA = vol.Schema(
    {
        vol.Required("kind"): LAYER_KIND_DENSE,
        vol.Required("activation"): vol.In([a.value for a in Activation]),
        vol.Required("shape"): SHAPE,
        vol.Required("tensors"): {vol.Required("w"): str, vol.Required("bias"): str},
    }
)

FACTORED_LAYER_SCHEMA = vol.Schema(
    {
        vol.Required("kind"): LAYER_KIND_FACTORED,
        vol.Required("activation"): vol.In([a.value for a in Activation]),
        vol.Required("shape"): SHAPE,
        vol.Required("k"): vol.All(int, vol.Range(min=1)),
        vol.Required("tensors"): {
            vol.Required("u"): str,
            vol.Required("s"): str,
            vol.Required("vt"): str,
            vol.Required("bias"): str,
        },
    }
)

MANIFEST_SCHEMA = vol.Schema(
    {
        vol.Required("format"): MANIFEST_FORMAT,
        vol.Required("version"): MANIFEST_VERSION,
        vol.Required("input_dim"): vol.All(int, vol.Range(min=1)),
        vol.Required("class_count"): vol.All(int, vol.Range(min=1)),
        vol.Required("layers"): vol.All(
            [vol.Any(DENSE_LAYER_SCHEMA, FACTORED_LAYER_SCHEMA)], vol.Length(min=1)
        ),
    }
)


def manifest_path_for(container_path: str | Path) -> Path:
    """Return the manifest path beside a container, M.artn -> M.manifest.json."""
    path = Path(container_path)
    stem = path.name.removesuffix(CONTAINER_SUFFIX)
    return path.with_name(stem + MANIFEST_SUFFIX)


def build_manifest(model: ModelGraph) -> tuple[dict[str, Any], dict[str, np.ndarray]]:
    """Return the manifest document and the named tensors of ``model``."""
    layers: list[dict[str, Any]] = []
    tensors: dict[str, np.ndarray] = {}
    for index, layer in enumerate(model.layers):
        prefix = f"layer{index}"
        entry: dict[str, Any]
        if isinstance(layer, FactoredLayer):
            names = {
                "u": f"{prefix}.u",
                "s": f"{prefix}.s",
                "vt": f"{prefix}.vt",
                "bias": f"{prefix}.bias",
            }
            tensors.update(
                {
                    names["u"]: layer.u,
                    names["s"]: layer.s,
                    names["vt"]: layer.vt,
                    names["bias"]: layer.bias,
                }
            )
            entry = {
                "kind": LAYER_KIND_FACTORED,
                "activation": layer.activation.value,
                "shape": list(layer.shape),
                "k": layer.k,
                "tensors": names,
            }
        else:
            names = {"w": f"{prefix}.w", "bias": f"{prefix}.bias"}
            tensors.update({names["w"]: layer.w, names["bias"]: layer.bias})
            entry = {
                "kind": LAYER_KIND_DENSE,
                "activation": layer.activation.value,
                "shape": list(layer.shape),
                "tensors": names,
            }
        layers.append(entry)

    manifest = {
        "format": MANIFEST_FORMAT,
        "version": MANIFEST_VERSION,
        "input_dim": model.input_dim,
        "class_count": model.class_count,
        "layers": layers,
    }
    return manifest, tensors


def _tensor(tensors: dict[str, np.ndarray], name: str, index: int) -> np.ndarray:
    try:
        return tensors[name]
    except KeyError:
        raise ManifestError(
            f"Layer {index} references tensor {name!r} missing from the container"
        ) from None


def _layer_from_entry(
    entry: dict[str, Any], tensors: dict[str, np.ndarray], index: int
) -> Layer:
    names = entry["tensors"]
    m, n = entry["shape"]
    bias = _tensor(tensors, names["bias"], index)
    layer: Layer
    if entry["kind"] == LAYER_KIND_FACTORED:
        factors = LowRankFactors(
            u=_tensor(tensors, names["u"], index),
            s=_tensor(tensors, names["s"], index),
            vt=_tensor(tensors, names["vt"], index),
        )
        if factors.k != entry["k"]:
            raise ManifestError(
                f"Layer {index} declares k={entry['k']}, factors have rank {factors.k}"
            )
        layer = FactoredLayer(
            factors=factors, bias=bias, activation=entry["activation"]
        )
    else:
        layer = DenseLayer(
            w=_tensor(tensors, names["w"], index),
            bias=bias,
            activation=entry["activation"],
        )
    if layer.shape != (m, n):
        raise ManifestError(
            f"Layer {index} declares shape {m}x{n}, tensors give "
            f"{layer.shape[0]}x{layer.shape[1]}"
        )
    return layer


def model_from_manifest(
    manifest: dict[str, Any], tensors: dict[str, np.ndarray]
) -> ModelGraph:
    """Rebuild a model from its manifest and container tensors.

    Raises:
        ManifestError: if the manifest is malformed, references a missing tensor
            or its layer dimensions do not chain.
    """
    try:
        valid = MANIFEST_SCHEMA(manifest)
    except vol.Invalid as exc:
        raise ManifestError(f"Invalid manifest: {exc}") from exc
    try:
        layers = [
            _layer_from_entry(entry, tensors, index)
            for index, entry in enumerate(valid["layers"])
        ]
        return ModelGraph(
            layers=tuple(layers),
            input_dim=valid["input_dim"],
            class_count=valid["class_count"],
        )
    except ManifestError:
        raise
    except ContractViolationError as exc:
        raise ManifestError(f"Inconsistent model: {exc.message}") from exc


def save_model(
    model: ModelGraph,
    path: str | Path,
    manifest_path: str | Path | None = None,
) -> Path:
    """Write the container to ``path`` and its manifest beside it."""
    manifest, tensors = build_manifest(model)
    target = Path(manifest_path) if manifest_path else manifest_path_for(path)
    size = write_container(path, tensors)
    try:
        target.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    except OSError as exc:
        raise ArsvdIOError(f"Cannot write manifest {target}: {exc}") from exc
    _LOGGER.info("Saved %d-layer model to %s (%d bytes)", model.depth, path, size)
    return target


def load_model(path: str | Path, manifest_path: str | Path | None = None) -> ModelGraph:
    """Read a model saved by :func:`save_model`."""
    source = Path(manifest_path) if manifest_path else manifest_path_for(path)
    try:
        text = source.read_text(encoding="utf-8")
    except OSError as exc:
        raise ArsvdIOError(f"Cannot read manifest {source}: {exc}") from exc
    try:
        manifest = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"Manifest {source} is not valid JSON: {exc}") from exc
    model = model_from_manifest(manifest, read_container(path))
    _LOGGER.debug("Loaded %d-layer model from %s", model.depth, path)
    return model
