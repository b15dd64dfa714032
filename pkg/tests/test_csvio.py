"""Tests for the CSV trial grammar and the events sidecar."""

import numpy as np
import pytest

from exogait.csvio import read_csv_trial, read_events_csv
from exogait.errors import (
    BadHeaderRow,
    NonNumericCell,
    RaggedRows,
    UnknownEventLabel,
)
from exogait.trial import EventKind, Side

_BASIC = """time,HEE.x,HEE.y,HEE.z,analog:angle
0.00,1.0,2.0,3.0,10.0
0.01,1.1,2.1,3.1,11.0
0.02,1.2,2.2,3.2,12.0
0.03,1.3,2.3,3.3,13.0
0.04,1.4,2.4,3.4,14.0
"""


def test_basic_trial():
    trial = read_csv_trial(_BASIC)
    assert trial.point_rate == pytest.approx(100.0)
    assert trial.first_frame == 1
    assert trial.last_frame == 5
    assert [m.label for m in trial.markers] == ["HEE"]
    hee = trial.marker("HEE")
    assert hee.valid.all()
    np.testing.assert_allclose(hee.coords[:, 0], [1.0, 1.1, 1.2, 1.3, 1.4])
    np.testing.assert_allclose(hee.coords[2], [1.2, 2.2, 3.2])
    angle = trial.analog("angle")
    np.testing.assert_allclose(angle.samples, [10.0, 11.0, 12.0, 13.0, 14.0])
    assert angle.rate == pytest.approx(100.0)


def test_gap_rows():
    text = (
        "time,HEE.x,HEE.y,HEE.z\n"
        "0.00,1.0,2.0,3.0\n"
        "0.01,,,\n"
        "0.02,1.2,2.2,3.2\n"
    )
    trial = read_csv_trial(text)
    hee = trial.marker("HEE")
    assert hee.valid.tolist() == [True, False, True]


def test_partial_gap_is_non_numeric():
    text = (
        "time,HEE.x,HEE.y,HEE.z\n"
        "0.00,1.0,2.0,3.0\n"
        "0.01,1.1,,3.1\n"
    )
    with pytest.raises(NonNumericCell):
        read_csv_trial(text)


def test_non_numeric_cell():
    text = (
        "time,HEE.x,HEE.y,HEE.z\n"
        "0.00,a,b,c\n"
        "0.01,1.0,2.0,3.0\n"
    )
    with pytest.raises(NonNumericCell):
        read_csv_trial(text)


def test_ragged_rows():
    text = (
        "time,HEE.x,HEE.y,HEE.z\n"
        "0.00,1.0,2.0,3.0\n"
        "0.01,1.0,2.0\n"
    )
    with pytest.raises(RaggedRows):
        read_csv_trial(text)


def test_bad_headers():
    with pytest.raises(BadHeaderRow):
        read_csv_trial("frame,HEE.x,HEE.y,HEE.z\n0,1,2,3\n1,1,2,3\n")
    with pytest.raises(BadHeaderRow):
        read_csv_trial("time,HEE.x,HEE.z,HEE.y\n0,1,2,3\n0.01,1,2,3\n")
    with pytest.raises(BadHeaderRow):
        read_csv_trial("time,HEE.x,HEE.y\n0,1,2\n0.01,1,2\n")
    with pytest.raises(BadHeaderRow):
        read_csv_trial("time,analog:\n0,1\n0.01,1\n")
    with pytest.raises(BadHeaderRow):
        read_csv_trial("")
    with pytest.raises(BadHeaderRow):
        # one data row is not enough to infer a rate
        read_csv_trial("time,analog:x\n0.0,1.0\n")


def test_time_origin_sets_first_frame():
    text = (
        "time,analog:x\n"
        "0.05,1.0\n"
        "0.06,2.0\n"
        "0.07,3.0\n"
    )
    trial = read_csv_trial(text)
    # frame 1 sits at t = 0, so a series starting at 0.05 s at 100 Hz
    # begins at frame 6
    assert trial.first_frame == 6
    assert trial.last_frame == 8


def test_negative_time_origin_rejected():
    text = "time,analog:x\n-0.05,1.0\n-0.04,2.0\n"
    with pytest.raises(BadHeaderRow):
        read_csv_trial(text)


def test_non_increasing_time_rejected():
    text = "time,analog:x\n0.02,1.0\n0.02,2.0\n"
    with pytest.raises(BadHeaderRow):
        read_csv_trial(text)


def test_events_sidecar():
    text = (
        "time,context,label\n"
        "0.980,Left,Foot Strike\n"
        "0.000,Left,Foot Strike\n"
        "0.559,Left,Foot Off\n"
    )
    events = read_events_csv(text)
    assert [e.time for e in events] == [0.0, 0.559, 0.980]
    assert events[1].kind is EventKind.FOOT_OFF
    assert all(e.side is Side.LEFT for e in events)


def test_events_bad_header():
    with pytest.raises(BadHeaderRow):
        read_events_csv("time,side,label\n0.0,Left,Foot Strike\n")
    with pytest.raises(RaggedRows):
        read_events_csv("time,context,label\n0.0,Left\n")
    with pytest.raises(UnknownEventLabel):
        read_events_csv("time,context,label\n0.0,Left,Jump\n")
    with pytest.raises(NonNumericCell):
        read_events_csv("time,context,label\nx,Left,Foot Strike\n")
