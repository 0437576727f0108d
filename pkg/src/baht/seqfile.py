"""YAML sequence files.

Grammar (all keys lower case; unknown keys are rejected)::

    name: wahuha                # text, required
    dim: 2                      # integer >= 2, default 2
    base_unit_tau_ns: 50        # real > 0, required
    # exactly one of `pulses` or `frames`
    pulses:                     # each pulse is followed by its free interval
      - {axis: [1, 0, 0], angle_rad: 1.5707963267948966, duration_units: 1, label: X}
    closing_pulse: {axis: [1, 0, 0], angle_rad: -1.5707963267948966}   # optional
    frames:                     # toggling-frame table for H0 along S_z
      - {axis: [0, 0, 1], sign: 1, duration_units: 1}
    ac_signs: [1, -1]           # optional square-wave sign per interval

``axis`` is a unit 3-vector (to 1e-10). ``duration_units`` is a positive
integer count of ``base_unit_tau_ns``. A frame table is converted to pulses
that realise it plus a closing pulse; its ``axis`` may be any unit vector.

Errors raise :class:`~baht.errors.SequenceParseError` carrying the 1-based
line and column of the offending node.
"""

import math

import numpy as np
import yaml
from yaml.constructor import ConstructorError, SafeConstructor

from .errors import SequenceParseError, UsageError
from .sequences import Pulse, PulseSequence, _axis_of_signed, from_frame_table

TOP_KEYS = {"name", "dim", "base_unit_tau_ns", "pulses", "frames", "closing_pulse", "ac_signs"}
PULSE_KEYS = {"axis", "angle_rad", "duration_units", "label"}
CLOSING_KEYS = {"axis", "angle_rad", "label"}
FRAME_KEYS = {"axis", "sign", "duration_units"}
NS = 1e-9


def _fail(node, message):
    mark = getattr(node, "start_mark", None)
    if mark is None:
        raise SequenceParseError(message)
    raise SequenceParseError(message, mark.line + 1, mark.column + 1)


def _scalar(node, what):
    if not isinstance(node, yaml.ScalarNode):
        _fail(node, f"{what} must be a scalar")
    try:
        return SafeConstructor().construct_object(node)
    except ConstructorError as exc:
        _fail(node, f"{what}: {exc.problem}")


def _mapping(node, allowed, what):
    if not isinstance(node, yaml.MappingNode):
        _fail(node, f"{what} must be a mapping")
    out = {}
    for key_node, value_node in node.value:
        key = _scalar(key_node, "key")
        if key not in allowed:
            _fail(key_node, f"unknown key {key!r} in {what}; expected one of {sorted(allowed)}")
        if key in out:
            _fail(key_node, f"duplicate key {key!r} in {what}")
        out[key] = value_node
    return out


def _require(fields, key, parent, what):
    if key not in fields:
        _fail(parent, f"{what} is missing {key!r}")
    return fields[key]


def _sequence(node, what):
    if not isinstance(node, yaml.SequenceNode):
        _fail(node, f"{what} must be a list")
    return node.value


def _number(node, what):
    value = _scalar(node, what)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        _fail(node, f"{what} must be a number")
    if not math.isfinite(value):
        _fail(node, f"{what} must be finite")
    return float(value)


def _integer(node, what):
    value = _scalar(node, what)
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if isinstance(value, bool) or not isinstance(value, int):
        _fail(node, f"{what} must be an integer")
    return value


def _units(node, what):
    k = _scalar(node, what)
    if isinstance(k, bool) or not isinstance(k, (int, float)):
        _fail(node, f"{what} must be a number")
    if k <= 0:
        _fail(node, f"{what} must be positive, got {k}")
    if isinstance(k, float) and not k.is_integer():
        _fail(node, f"{what} must be an integer number of base units, got {k}")
    return int(k)


def _axis(node, what):
    comps = _sequence(node, what)
    if len(comps) != 3:
        _fail(node, f"{what} must have 3 components")
    vec = [_number(c, f"{what} component") for c in comps]
    norm = math.sqrt(sum(c * c for c in vec))
    if abs(norm - 1.0) > 1e-10:
        _fail(node, f"{what} {vec} is not a unit vector (norm {norm:.12g})")
    return tuple(vec)


def _pulse(node, allowed, what):
    fields = _mapping(node, allowed, what)
    axis = _axis(_require(fields, "axis", node, what), f"{what} axis")
    angle = _number(_require(fields, "angle_rad", node, what), f"{what} angle_rad")
    label = str(_scalar(fields["label"], "label")) if "label" in fields else ""
    return Pulse(axis, angle, label), fields


def parse_sequence_file(content):
    """Parse sequence-file text into a :class:`PulseSequence`."""
    try:
        root = yaml.compose(content, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        raise SequenceParseError(
            f"syntax error: {exc.problem or exc.context}",
            mark.line + 1 if mark else None,
            mark.column + 1 if mark else None,
        ) from None
    except yaml.YAMLError as exc:
        raise SequenceParseError(f"syntax error: {exc}") from None
    if root is None:
        raise SequenceParseError("empty sequence file", 1, 1)
    top = _mapping(root, TOP_KEYS, "sequence file")
    name = str(_scalar(_require(top, "name", root, "sequence file"), "name"))
    dim = _integer(top["dim"], "dim") if "dim" in top else 2
    if dim < 2:
        _fail(top["dim"], "dim must be >= 2")
    tau_node = _require(top, "base_unit_tau_ns", root, "sequence file")
    tau_ns = _number(tau_node, "base_unit_tau_ns")
    if tau_ns <= 0:
        _fail(tau_node, "base_unit_tau_ns must be positive")
    if ("pulses" in top) == ("frames" in top):
        _fail(root, "give exactly one of 'pulses' or 'frames'")

    ac_signs = None
    if "ac_signs" in top:
        ac_signs = []
        for item in _sequence(top["ac_signs"], "ac_signs"):
            s = _integer(item, "ac_signs entry")
            if s not in (1, -1):
                _fail(item, "ac_signs entries must be +1 or -1")
            ac_signs.append(s)

    if "pulses" in top:
        pulses, units = [], []
        items = _sequence(top["pulses"], "pulses")
        if not items:
            _fail(top["pulses"], "pulses must not be empty")
        for i, item in enumerate(items, 1):
            pulse, fields = _pulse(item, PULSE_KEYS, f"pulse {i}")
            pulses.append(pulse)
            units.append(_units(_require(fields, "duration_units", item, f"pulse {i}"),
                                f"pulse {i} duration_units"))
        closing = None
        if "closing_pulse" in top:
            closing, _ = _pulse(top["closing_pulse"], CLOSING_KEYS, "closing_pulse")
        if ac_signs is not None and len(ac_signs) != len(pulses):
            _fail(top["ac_signs"], f"ac_signs has {len(ac_signs)} entries for {len(pulses)} intervals")
        return PulseSequence(name, tuple(pulses), tuple(units), tau_ns * NS, dim,
                             closing_pulse=closing, ac_signs=ac_signs)

    if "closing_pulse" in top:
        _fail(top["closing_pulse"], "closing_pulse is derived for frame tables; remove it")
    table, units = [], []
    items = _sequence(top["frames"], "frames")
    if not items:
        _fail(top["frames"], "frames must not be empty")
    for i, item in enumerate(items, 1):
        what = f"frame {i}"
        fields = _mapping(item, FRAME_KEYS, what)
        axis = _axis(_require(fields, "axis", item, what), f"{what} axis")
        sign_node = _require(fields, "sign", item, what)
        sign = _integer(sign_node, f"{what} sign")
        if sign not in (1, -1):
            _fail(sign_node, f"{what} sign must be +1 or -1")
        named = _axis_of_signed(axis)
        table.append((named[0], sign * named[1]) if named else (axis, sign))
        units.append(_units(_require(fields, "duration_units", item, what),
                            f"{what} duration_units"))
    if ac_signs is not None and len(ac_signs) != len(table):
        _fail(top["ac_signs"], f"ac_signs has {len(ac_signs)} entries for {len(table)} frames")
    try:
        return from_frame_table(name, table, units, tau_ns * NS, dim, ac_signs=ac_signs)
    except UsageError as exc:
        _fail(top["frames"], str(exc))


def load_sequence_file(path):
    with open(path, encoding="utf-8") as fh:
        return parse_sequence_file(fh.read())


def _axis_list(axis):
    if isinstance(axis, str):
        return [1.0 if axis == c else 0.0 for c in "xyz"]
    return [float(c) for c in axis]


def _pulse_dict(p):
    out = {"axis": [float(c) for c in p.axis], "angle_rad": float(p.angle)}
    if p.label:
        out["label"] = p.label
    return out


def sequence_to_dict(seq):
    doc = {"name": seq.name, "dim": int(seq.dim), "base_unit_tau_ns": float(f"{seq.base_unit_tau / NS:.15g}")}
    if seq.frame_table is not None:
        doc["frames"] = [
            {"axis": _axis_list(a), "sign": int(s), "duration_units": int(k)}
            for (a, s), k in zip(seq.frame_table, seq.units)
        ]
    else:
        doc["pulses"] = [dict(_pulse_dict(p), duration_units=int(k))
                         for p, k in zip(seq.pulses, seq.units)]
        if seq.closing_pulse is not None:
            doc["closing_pulse"] = _pulse_dict(seq.closing_pulse)
    if seq.ac_signs is not None:
        doc["ac_signs"] = [int(s) for s in seq.ac_signs]
    return doc


def serialize_sequence(seq):
    """Sequence-file text that parses back to an equivalent sequence."""
    return yaml.safe_dump(sequence_to_dict(seq), sort_keys=False, default_flow_style=None)


def same_sequence(a, b, tol=1e-12):
    """Semantic equality: same dimension, durations and pulse unitaries."""
    if a.dim != b.dim or a.units != b.units:
        return False
    if abs(a.base_unit_tau - b.base_unit_tau) > tol * a.base_unit_tau:
        return False
    ua = a.pulse_unitaries() + [a.net_rotation()]
    ub = b.pulse_unitaries() + [b.net_rotation()]
    return all(np.max(np.abs(x - y)) <= tol for x, y in zip(ua, ub))
