import csv
import io
import json
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from ..errors import SchemaError, SpectrascopeError
from ..models.alphabet import Alphabet
from ..models.catalog import load_catalog_model
from ..models.code import SlidingBlockCode
from ..models.process import FactorModel, IIDModel, MarkovModel, MixtureModel, ProcessModel
from ..models.spectra import Spectrum, SpectrumEstimate, StaircaseSpectrum
from ..utils.enumeration import all_blocks
from ..utils.logger import get_logger

logger = get_logger(__name__)

SCHEMA_VERSION = 1
CATALOG_PREFIX = "catalog:"
SIGNIFICANT_DIGITS = 9


def round_floats(value: Any) -> Any:
    """Round every float to a fixed number of significant digits; non-finite floats become strings."""
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return str(value)
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, np.ndarray):
        return round_floats(value.tolist())
    if isinstance(value, dict):
        return {str(k): round_floats(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_floats(v) for v in value]
    return value


def canonical_json(payload: Dict[str, Any]) -> str:
    return json.dumps(round_floats(payload), sort_keys=True, indent=2) + "\n"


def atomic_write(path: Union[str, Path], text: str):
    """Write text next to its destination and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except Exception:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _require(doc: Dict[str, Any], key: str, where: str) -> Any:
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(f"{where}: missing field {key!r}")
    return doc[key]


def _alphabet(doc: Dict[str, Any], key: str, where: str) -> Alphabet:
    labels = _require(doc, key, where)
    if not isinstance(labels, list):
        raise SchemaError(f"{where}: {key!r} must be a list of labels")
    return Alphabet(tuple(labels))


def parse_code(doc: Dict[str, Any], where: str = "code") -> SlidingBlockCode:
    x = _alphabet(doc, "input_alphabet", where)
    y = _alphabet(doc, "output_alphabet", where)
    radius = _require(doc, "radius", where)
    table = _require(doc, "table", where)
    if not isinstance(radius, int) or radius < 0:
        raise SchemaError(f"{where}: radius must be a non-negative integer")
    if not isinstance(table, dict):
        raise SchemaError(f"{where}: table must map window strings to output labels")
    values = []
    for window in all_blocks(x.size, 2 * radius + 1):
        key = x.decode(window)
        if key not in table:
            raise SchemaError(f"{where}: table has no entry for window {key!r}")
        values.append(y.index(str(table[key])))
    return SlidingBlockCode(x, y, radius, values)


def parse_model(doc: Dict[str, Any], where: str = "model") -> ProcessModel:
    kind = _require(doc, "type", where)
    try:
        if kind == "iid":
            return IIDModel(alphabet=_alphabet(doc, "alphabet", where), probs=_require(doc, "probs", where))
        if kind == "markov":
            alphabet = _alphabet(doc, "alphabet", where)
            order = _require(doc, "order", where)
            kernel = _require(doc, "kernel", where)
            if "initial" in doc:
                return MarkovModel(alphabet=alphabet, order=order, kernel=kernel, initial=doc["initial"])
            return MarkovModel.from_kernel(alphabet, order, kernel)
        if kind == "factor":
            base = parse_model(_require(doc, "base", where), f"{where}.base")
            return FactorModel(base=base, code=parse_code(_require(doc, "code", where), f"{where}.code"))
        if kind == "mixture":
            components = _require(doc, "components", where)
            return MixtureModel(
                components=tuple(parse_model(c, f"{where}.components[{i}]") for i, c in enumerate(components)),
                weights=_require(doc, "weights", where),
            )
    except (TypeError, ValueError) as e:
        raise SchemaError(f"{where}: malformed {kind} model: {e}") from e
    raise SchemaError(f"{where}: unknown model type {kind!r}")


def _check_schema(doc: Any, source: str):
    if not isinstance(doc, dict):
        raise SchemaError(f"{source}: top level must be a JSON object")
    if doc.get("schema") != SCHEMA_VERSION:
        raise SchemaError(f"{source}: expected \"schema\": {SCHEMA_VERSION}, got {doc.get('schema')!r}")


class StorageService:
    """Reads and writes models, codes, spectra and reports."""

    def read_json(self, path: Union[str, Path]) -> Dict[str, Any]:
        try:
            with open(path, encoding="utf-8") as handle:
                doc = json.load(handle)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: invalid JSON: {e}") from e
        _check_schema(doc, str(path))
        return doc

    def load_model(self, source: str) -> ProcessModel:
        """Load a model from a JSON file or `catalog:<name>`."""
        if source.startswith(CATALOG_PREFIX):
            return load_catalog_model(source[len(CATALOG_PREFIX):])
        try:
            model = parse_model(self.read_json(source), source)
            logger.info(f"Loaded {type(model).__name__} from {source}")
            return model
        except SpectrascopeError as e:
            logger.error(f"Failed to load model from {source}: {e}")
            raise

    def load_code(self, path: str) -> SlidingBlockCode:
        try:
            return parse_code(self.read_json(path), path)
        except SpectrascopeError as e:
            logger.error(f"Failed to load code from {path}: {e}")
            raise

    def load_spectrum(self, path: str) -> Spectrum:
        """Staircases carry `jumps`; estimates carry `tau` and `F` with their sampling metadata."""
        doc = self.read_json(path)
        try:
            if "jumps" in doc:
                jumps = [(float(t), float(m)) for t, m in doc["jumps"]]
                total = sum(m for _, m in jumps)
                # Artifacts are rounded to 9 significant digits; restore unit mass.
                if abs(total - 1.0) > 1e-6:
                    raise SchemaError(f"{path}: staircase masses sum to {total}")
                return StaircaseSpectrum(tuple((t, m / total) for t, m in jumps))
            return SpectrumEstimate(
                n=int(_require(doc, "n", path)),
                gamma=float(_require(doc, "gamma", path)),
                num_samples=int(_require(doc, "num_samples", path)),
                tau_grid=np.array(_require(doc, "tau", path), dtype=float),
                cdf=np.array(_require(doc, "F", path), dtype=float),
                seed=int(doc.get("seed", 0)),
                alphabet_size=int(_require(doc, "alphabet_size", path)),
            )
        except (TypeError, ValueError) as e:
            raise SchemaError(f"{path}: malformed spectrum: {e}") from e

    def render(self, payload: Dict[str, Any], rounded: bool = True) -> str:
        doc = {"schema": SCHEMA_VERSION, **payload}
        if rounded:
            return canonical_json(doc)
        return json.dumps(doc, sort_keys=True, indent=2) + "\n"

    def save_json(self, payload: Dict[str, Any], path: Optional[str] = None, rounded: bool = True) -> str:
        """Write a versioned JSON artifact; stdout when no path is given.

        Reports are rounded to fixed precision. Models and codes keep full precision
        so that they reload through the same validation.
        """
        text = self.render(payload, rounded)
        if path is None:
            print(text, end="")
        else:
            atomic_write(path, text)
            logger.info(f"Wrote {path}")
        return text

    def spectrum_csv(self, spectrum: Spectrum) -> str:
        if isinstance(spectrum, StaircaseSpectrum):
            taus = spectrum.taus
            values = spectrum.evaluate(taus)
        else:
            taus, values = spectrum.tau_grid, spectrum.cdf
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["tau", "F"])
        for tau, value in zip(taus, values):
            writer.writerow([f"{tau:.{SIGNIFICANT_DIGITS}g}", f"{value:.{SIGNIFICANT_DIGITS}g}"])
        return buffer.getvalue()

    def save_spectrum(self, spectrum: Spectrum, path: Optional[str] = None) -> str:
        """CSV when the destination ends in .csv, versioned JSON otherwise."""
        if path is not None and path.lower().endswith(".csv"):
            text = self.spectrum_csv(spectrum)
            atomic_write(path, text)
            logger.info(f"Wrote {path}")
            return text
        return self.save_json(spectrum.to_dict(), path)

    def save_model(self, model: ProcessModel, path: Optional[str] = None) -> str:
        return self.save_json(model.to_dict(), path, rounded=False)

    def save_code(self, code: SlidingBlockCode, path: Optional[str] = None) -> str:
        return self.save_json(code.to_dict(), path, rounded=False)
