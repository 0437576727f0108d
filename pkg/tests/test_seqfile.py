import pathlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from baht.echo import is_rapid_echo
from baht.errors import SequenceParseError
from baht.linalg import spin_operators
from baht.seqfile import load_sequence_file, parse_sequence_file, same_sequence, serialize_sequence
from baht.sequences import BUILTIN_NAMES, builtin, split_to_equal_tau, toggling_frames

S = spin_operators(2)
SEQ_DIR = pathlib.Path(__file__).resolve().parent.parent / "sequences"

RAMSEY = """\
name: ramsey
base_unit_tau_ns: 100
pulses:
  - {axis: [0, 0, 1], angle_rad: 0, duration_units: 1}
"""


def test_ramsey_file():
    seq = parse_sequence_file(RAMSEY)
    assert seq.n == 1 and seq.units == (1,)
    assert seq.period == pytest.approx(1e-7)
    assert seq.dim == 2


@settings(max_examples=30, deadline=None)
@given(name=st.sampled_from(BUILTIN_NAMES), tau_ns=st.floats(0.1, 1e4), reps=st.integers(1, 3))
def test_builtin_round_trip(name, tau_ns, reps):
    seq = builtin(name, tau_ns * 1e-9, reps)
    back = parse_sequence_file(serialize_sequence(seq))
    assert same_sequence(seq, back)
    assert back.ac_signs == seq.ac_signs
    assert serialize_sequence(back) == serialize_sequence(seq)


def test_pulse_round_trip_with_closing_pulse():
    text = RAMSEY.replace("pulses:", "closing_pulse: {axis: [1, 0, 0], angle_rad: 3.14}\npulses:")
    seq = parse_sequence_file(text)
    assert seq.closing_pulse.angle == 3.14
    assert same_sequence(seq, parse_sequence_file(serialize_sequence(seq)))


def test_general_axis_frames():
    text = """\
name: tilted
base_unit_tau_ns: 10
frames:
  - {axis: [0.6, 0.8, 0], sign: 1, duration_units: 2}
  - {axis: [0.6, 0.8, 0], sign: -1, duration_units: 2}
"""
    seq = parse_sequence_file(text)
    frames = toggling_frames(seq, S.z)
    assert np.allclose(frames[0].hamiltonian, 0.6 * S.x + 0.8 * S.y, atol=1e-15)
    # splitting into unit steps pairs H with H, which is no longer an echo
    assert not is_rapid_echo(split_to_equal_tau(frames, 1e-8)).is_rapid_echo
    assert is_rapid_echo(frames).is_rapid_echo


@pytest.mark.parametrize("path", sorted(SEQ_DIR.glob("*.yaml")), ids=lambda p: p.stem)
def test_shipped_files_load(path):
    seq = load_sequence_file(path)
    assert same_sequence(seq, parse_sequence_file(serialize_sequence(seq)))


def test_shipped_wahuha_variants_agree():
    ref = toggling_frames(builtin("wahuha", 50e-9), S.z)
    for stem in ("wahuha_pulses", "wahuha_5pulse"):
        seq = load_sequence_file(SEQ_DIR / f"{stem}.yaml")
        frames = split_to_equal_tau(toggling_frames(seq, S.z))
        assert all(np.allclose(a.hamiltonian, b.hamiltonian, atol=1e-14)
                   for a, b in zip(frames, ref))


def test_shipped_droid_like_is_rapid_echo():
    seq = load_sequence_file(SEQ_DIR / "droid_like.yaml")
    assert is_rapid_echo(toggling_frames(seq, S.z)).is_rapid_echo


def _error(text):
    with pytest.raises(SequenceParseError) as info:
        parse_sequence_file(text)
    return info.value.as_dict()


def test_non_unit_axis_reports_position():
    err = _error("name: a\nbase_unit_tau_ns: 1\nframes:\n  - {axis: [1, 1, 0], sign: 1, duration_units: 1}\n")
    assert (err["line"], err["column"]) == (4, 12)
    assert "unit vector" in err["message"]


@pytest.mark.parametrize("units,fragment", [("0", "positive"), ("-2", "positive"),
                                            ("1.5", "integer"), ("x", "number")])
def test_bad_durations(units, fragment):
    err = _error(f"name: a\nbase_unit_tau_ns: 1\nframes:\n  - {{axis: [1, 0, 0], sign: 1, duration_units: {units}}}\n")
    assert err["line"] == 4
    assert fragment in err["message"]


@pytest.mark.parametrize("text,line", [
    ("name: a\nbase_unit_tau_ns: 1\nframes: [\n", 4),
    ("name: a\nbase_unit_tau_ns: 1\nfoo: 2\nframes: []\n", 3),
    ("name: a\nbase_unit_tau_ns: -1\nframes: []\n", 2),
    ("name: a\nbase_unit_tau_ns: 1\n", 1),
    ("name: a\nbase_unit_tau_ns: 1\nframes:\n  - {axis: [0, 0, 1], sign: 2, duration_units: 1}\n", 4),
    ("name: a\nbase_unit_tau_ns: 1\nframes:\n  - {axis: [0, 1], sign: 1, duration_units: 1}\n", 4),
    ("name: a\nbase_unit_tau_ns: 1\nac_signs: [1, 1]\nframes:\n  - {axis: [0, 0, 1], sign: 1, duration_units: 1}\n", 3),
    ("- just\n- a list\n", 1),
])
def test_malformed_inputs(text, line):
    err = _error(text)
    assert err["line"] == line
    assert err["column"] >= 1 and err["message"]


def test_empty_file():
    assert _error("")["message"] == "empty sequence file"
