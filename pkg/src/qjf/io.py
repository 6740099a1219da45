"""Model-definition files (JSON) and atomic output writing.

Schema: complex scalars are [re, im] pairs; matrices are flat row-major lists
of such pairs.

    {
      "dim": d,
      "hamiltonian": [[re, im], ...],
      "jumps": [{"label": str, "matrix": [[re, im], ...]}, ...],
      "observable": {"m": int, "weights": [[...], ...]},
      "symmetry": {"perm": [...], "v": [[re, im], ...], "u": [[...], ...]},
      "psi0": [[re, im], ...]
    }

"symmetry" and "psi0" are optional; "perm" uses 0-based channel indices.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import ModelValidationError
from .lindblad import CountingObservable, LindbladModel
from .models import ModelBundle
from .symmetry import PermutationSymmetry, check_weight_compatibility

SCHEMA_VERSION = 1

_ALLOWED_KEYS = {"schema_version", "name", "dim", "hamiltonian", "jumps",
                 "observable", "symmetry", "psi0"}


class _Float17Encoder(json.JSONEncoder):
    """JSON encoder printing floats with 17 significant digits (round-trip safe)."""

    def iterencode(self, o, _one_shot=False):
        markers = {} if self.check_circular else None
        encoder = (json.encoder.py_encode_basestring_ascii if self.ensure_ascii
                   else json.encoder.py_encode_basestring)
        return json.encoder._make_iterencode(
            markers, self.default, encoder, self.indent,
            lambda x: format(x, ".17g"),
            self.key_separator, self.item_separator, self.sort_keys,
            self.skipkeys, _one_shot,
        )(o, 0)


def dump_json(doc, indent: int | None = 2) -> str:
    """Serialize with 17-significant-digit floats."""
    return json.dumps(doc, indent=indent, cls=_Float17Encoder)


def _encode_matrix(m: np.ndarray) -> list[list[float]]:
    flat = np.asarray(m, dtype=complex).reshape(-1)  # row-major
    return [[float(z.real), float(z.imag)] for z in flat]


def _decode_matrix(entries, rows: int, cols: int, what: str) -> np.ndarray:
    try:
        pairs = [(float(re), float(im)) for re, im in entries]
    except (TypeError, ValueError) as exc:
        raise ModelValidationError(f"{what}: entries must be [re, im] pairs") from exc
    if len(pairs) != rows * cols:
        raise ModelValidationError(
            f"{what}: expected {rows * cols} entries for a {rows}x{cols} matrix, "
            f"got {len(pairs)}"
        )
    flat = np.array([complex(re, im) for re, im in pairs])
    return flat.reshape(rows, cols)  # row-major


def _decode_vector(entries, length: int, what: str) -> np.ndarray:
    return _decode_matrix(entries, length, 1, what).reshape(-1)


def bundle_to_dict(bundle: ModelBundle) -> dict:
    """Serialize a model bundle to the model-file schema."""
    model, obs = bundle.model, bundle.observable
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": bundle.name,
        "dim": model.dim,
        "hamiltonian": _encode_matrix(model.hamiltonian),
        "jumps": [
            {"label": label, "matrix": _encode_matrix(op)} for label, op in model.jumps
        ],
        "observable": {
            "m": obs.m,
            "weights": [[float(x) for x in row] for row in obs.weights],
        },
    }
    if bundle.symmetry is not None:
        sym = bundle.symmetry
        doc["symmetry"] = {
            "perm": list(sym.perm),
            "v": _encode_matrix(sym.v),
            "u": [[float(x) for x in row] for row in sym.u],
        }
    if bundle.psi0 is not None:
        doc["psi0"] = _encode_matrix(bundle.psi0.reshape(-1, 1))
    return doc


def bundle_from_dict(doc: dict, name: str = "model") -> ModelBundle:
    """Validate and decode a model-file document."""
    if not isinstance(doc, dict):
        raise ModelValidationError("model document must be a JSON object")
    unknown = set(doc) - _ALLOWED_KEYS
    if unknown:
        raise ModelValidationError(f"unknown model-file keys: {sorted(unknown)}")
    for key in ("dim", "hamiltonian", "jumps", "observable"):
        if key not in doc:
            raise ModelValidationError(f"model file is missing {key!r}")
    dim = int(doc["dim"])
    if dim < 1:
        raise ModelValidationError("dim must be >= 1")
    h = _decode_matrix(doc["hamiltonian"], dim, dim, "hamiltonian")
    jumps = []
    for k, entry in enumerate(doc["jumps"]):
        if "label" not in entry or "matrix" not in entry:
            raise ModelValidationError(f"jump #{k} needs 'label' and 'matrix'")
        jumps.append(
            (str(entry["label"]), _decode_matrix(entry["matrix"], dim, dim,
                                                 f"jump {entry['label']!r}"))
        )
    model = LindbladModel(h, tuple(jumps))

    obs_doc = doc["observable"]
    m = int(obs_doc["m"])
    weights = np.asarray(obs_doc["weights"], dtype=float)
    if weights.shape != (model.n_channels, m):
        raise ModelValidationError(
            f"observable weights have shape {weights.shape}, expected "
            f"{(model.n_channels, m)}"
        )
    observable = CountingObservable(weights)

    symmetry = None
    if "symmetry" in doc:
        sym_doc = doc["symmetry"]
        perm = tuple(int(p) for p in sym_doc["perm"])
        if len(perm) != model.n_channels:
            raise ModelValidationError(
                f"symmetry perm has {len(perm)} entries for {model.n_channels} channels"
            )
        v = _decode_matrix(sym_doc["v"], dim, dim, "symmetry v")
        u = np.asarray(sym_doc["u"], dtype=float)
        symmetry = PermutationSymmetry(perm=perm, v=v, u=u)
        check_weight_compatibility(symmetry, observable)

    psi0 = None
    if "psi0" in doc:
        psi0 = _decode_vector(doc["psi0"], dim, "psi0")
        norm = np.linalg.norm(psi0)
        if abs(norm - 1.0) > 1e-10:
            raise ModelValidationError(f"psi0 norm {norm} differs from 1 beyond 1e-10")

    return ModelBundle(name=str(doc.get("name", name)), model=model,
                       observable=observable, symmetry=symmetry, psi0=psi0)


def load_model(path) -> ModelBundle:
    """Load and validate a model-definition JSON file."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ModelValidationError(f"{path}: invalid JSON: {exc}") from exc
    return bundle_from_dict(doc, name=path.stem)


def save_model(path, bundle: ModelBundle) -> None:
    atomic_write_text(path, dump_json(bundle_to_dict(bundle)) + "\n")


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file + rename so readers never see partial output."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
