"""JSON codecs for measures, functions, specs and generic report payloads.

Rationals travel as "p/q" strings in lowest terms. Parse errors carry the
JSON path of the offending entry, e.g. ``weights[3]: negative weight '-1/2'``.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import fields, is_dataclass
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional

from .cumulant_utils import CONJUGATE, CUMULANT, CUSTOM, KINDS, CumulantSpec
from .errors import FkgError, InstanceFormatError
from .lattice_utils import LatticeFunction, LatticeMeasure, LatticePoint, LatticeShape
from .partition_utils import BlockSplit, Partition

logger = logging.getLogger(__name__)

RATIONAL_PATTERN = re.compile(r'[+-]?\d+(?:/\d+)?')


def format_rational(value: Any) -> str:
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(raw: Any, path: str = '') -> Fraction:
    if isinstance(raw, bool):
        raise InstanceFormatError(path, f"expected a rational, got {raw!r}")
    if isinstance(raw, int):
        return Fraction(raw)
    if not isinstance(raw, str):
        raise InstanceFormatError(path, f"expected a rational string 'p/q', got {raw!r}")
    text = raw.strip()
    if not RATIONAL_PATTERN.fullmatch(text):
        raise InstanceFormatError(path, f"malformed rational '{raw}'")
    if '/' in text and int(text.split('/')[1]) == 0:
        raise InstanceFormatError(path, f"zero denominator in '{raw}'")
    return Fraction(text)


def parse_rational_list(raw: Any, path: str) -> List[Fraction]:
    if not isinstance(raw, list):
        raise InstanceFormatError(path, "expected a list of rationals")
    return [parse_rational(item, f"{path}[{index}]") for index, item in enumerate(raw)]


def _require_key(payload: Dict[str, Any], key: str, path: str) -> Any:
    if not isinstance(payload, dict):
        raise InstanceFormatError(path, "expected a JSON object")
    if key not in payload:
        raise InstanceFormatError(f"{path}.{key}" if path else key, "missing field")
    return payload[key]


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def parse_shape(raw: Any, path: str = 'shape') -> LatticeShape:
    if not isinstance(raw, list) or not raw:
        raise InstanceFormatError(path, "expected a nonempty list of chain lengths")
    lengths = []
    for index, item in enumerate(raw):
        if isinstance(item, bool) or not isinstance(item, int) or item < 2:
            raise InstanceFormatError(f"{path}[{index}]", f"chain length must be an integer >= 2, got {item!r}")
        lengths.append(item)
    return LatticeShape(tuple(lengths))


def shape_from_text(text: str) -> LatticeShape:
    """Parse the command-line form ``2,2,2``."""
    try:
        lengths = [int(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise InstanceFormatError('--shape', f"malformed shape '{text}'")
    return parse_shape(lengths, '--shape')


def measure_to_payload(mu: LatticeMeasure) -> Dict[str, Any]:
    return {
        'shape': list(mu.shape.chain_lengths),
        'weights': [format_rational(w) for w in mu.weights],
    }


def measure_from_payload(payload: Any, path: str = '') -> LatticeMeasure:
    shape = parse_shape(_require_key(payload, 'shape', path), _join(path, 'shape'))
    weights_path = _join(path, 'weights')
    weights = parse_rational_list(_require_key(payload, 'weights', path), weights_path)
    if len(weights) != shape.size:
        raise InstanceFormatError(weights_path, f"expected {shape.size} weights, got {len(weights)}")
    for index, (w, raw) in enumerate(zip(weights, payload['weights'])):
        if w < 0:
            raise InstanceFormatError(f"{weights_path}[{index}]", f"negative weight '{raw}'")
    return LatticeMeasure(shape, tuple(weights))


def function_to_payload(f: LatticeFunction) -> Dict[str, Any]:
    return {
        'shape': list(f.shape.chain_lengths),
        'values': [None if v is None else format_rational(v) for v in f.values],
    }


def function_from_payload(payload: Any, path: str = '', shape: Optional[LatticeShape] = None) -> LatticeFunction:
    if isinstance(payload, list):
        if shape is None:
            raise InstanceFormatError(path, "a bare value list needs a known shape")
        values = parse_rational_list(payload, path)
    else:
        shape = parse_shape(_require_key(payload, 'shape', path), _join(path, 'shape'))
        values = parse_rational_list(_require_key(payload, 'values', path), _join(path, 'values'))
    if len(values) != shape.size:
        raise InstanceFormatError(_join(path, 'values'), f"expected {shape.size} values, got {len(values)}")
    return LatticeFunction(shape, tuple(values))


def spec_to_payload(spec: CumulantSpec) -> Dict[str, Any]:
    return {
        'm': spec.m,
        'kind': spec.kind,
        'coeffs': [{'lambda': list(partition.parts), 'c': c} for partition, c in spec.coeffs],
    }


def spec_from_payload(payload: Any, path: str = '') -> CumulantSpec:
    m = _require_key(payload, 'm', path)
    if isinstance(m, bool) or not isinstance(m, int) or m < 1:
        raise InstanceFormatError(_join(path, 'm'), f"expected a positive integer, got {m!r}")
    kind = payload.get('kind', CUSTOM)
    if kind not in KINDS:
        raise InstanceFormatError(_join(path, 'kind'), f"unknown kind '{kind}'")
    if 'coeffs' not in payload and kind in (CONJUGATE, CUMULANT):
        return CumulantSpec.of_kind(m, kind)
    entries = _require_key(payload, 'coeffs', path)
    if not isinstance(entries, list):
        raise InstanceFormatError(_join(path, 'coeffs'), "expected a list of {lambda, c} entries")
    coeffs = []
    for index, entry in enumerate(entries):
        entry_path = f"{_join(path, 'coeffs')}[{index}]"
        parts = _require_key(entry, 'lambda', entry_path)
        c = _require_key(entry, 'c', entry_path)
        if isinstance(c, bool) or not isinstance(c, int):
            raise InstanceFormatError(f"{entry_path}.c", f"expected an integer, got {c!r}")
        try:
            coeffs.append((Partition(tuple(parts)), c))
        except (FkgError, TypeError) as exc:
            raise InstanceFormatError(f"{entry_path}.lambda", str(exc))
    try:
        return CumulantSpec(m, tuple(coeffs), kind)
    except FkgError as exc:
        raise InstanceFormatError(_join(path, 'coeffs'), str(exc))


def to_jsonable(value: Any) -> Any:
    if value is None or isinstance(value, (bool, int, str, float)):
        return value
    if isinstance(value, Fraction):
        return format_rational(value)
    if isinstance(value, Partition):
        return list(value.parts)
    if isinstance(value, BlockSplit):
        return [list(block) for block in value.blocks]
    if isinstance(value, LatticePoint):
        return list(value.coords)
    if isinstance(value, LatticeShape):
        return list(value.chain_lengths)
    if isinstance(value, LatticeMeasure):
        return measure_to_payload(value)
    if isinstance(value, LatticeFunction):
        return function_to_payload(value)
    if isinstance(value, CumulantSpec):
        return spec_to_payload(value)
    if hasattr(value, 'to_payload'):
        return to_jsonable(value.to_payload())
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (frozenset, set)):
        return sorted(to_jsonable(item) for item in value)
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if is_dataclass(value):
        return {f.name: to_jsonable(getattr(value, f.name)) for f in fields(value)}
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(value: Any) -> str:
    return json.dumps(to_jsonable(value), sort_keys=True, indent=2, ensure_ascii=False)


def load_json_file(path: str) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding='utf-8'))
    except FileNotFoundError:
        raise InstanceFormatError('', f"{path}: file not found")
    except json.JSONDecodeError as exc:
        raise InstanceFormatError('', f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}")


def functions_from_payload(raw: Any, path: str, shape: LatticeShape) -> List[LatticeFunction]:
    if not isinstance(raw, list) or not raw:
        raise InstanceFormatError(path, "expected a nonempty list of functions")
    functions = [function_from_payload(item, f"{path}[{index}]", shape) for index, item in enumerate(raw)]
    for index, f in enumerate(functions):
        if f.shape != shape:
            raise InstanceFormatError(f"{path}[{index}].shape", "function shape differs from the measure shape")
    return functions


def integer_list(raw: Any, path: str) -> List[int]:
    if not isinstance(raw, list) or any(isinstance(i, bool) or not isinstance(i, int) for i in raw):
        raise InstanceFormatError(path, "expected a list of integers")
    return list(raw)


def rational_matrix(raw: Any, path: str) -> List[List[Fraction]]:
    if not isinstance(raw, list) or not raw:
        raise InstanceFormatError(path, "expected a nonempty list of rows")
    rows = [parse_rational_list(row, f"{path}[{index}]") for index, row in enumerate(raw)]
    size = len(rows)
    for index, row in enumerate(rows):
        if len(row) != size:
            raise InstanceFormatError(f"{path}[{index}]", f"expected {size} entries for a square matrix, got {len(row)}")
    return rows
