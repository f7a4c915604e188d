import pytest
from hypothesis import given, strategies as st

from conftest import arp, stream_of
from lanwatch.errors import NoFullWindowError
from lanwatch.windows import (Window, ceil_hour, expanding_slice, floor_hour,
                              sliding_windows, window_slice)


def test_single_exact_window():
    ws = sliding_windows(0, 604800)
    assert len(ws) == 1
    assert (ws[0].t_start, ws[0].t_end) == (0, 604800)


def test_hourly_steps():
    ws = sliding_windows(0, 604800 + 2 * 3600)
    assert [w.t_start for w in ws] == [0, 3600, 7200]
    assert all(w.t_end - w.t_start == 604800 for w in ws)


def test_short_span_raises():
    with pytest.raises(NoFullWindowError):
        sliding_windows(0, 604799)


def test_bad_width():
    with pytest.raises(ValueError):
        sliding_windows(0, 100, width=0, step=1)


@given(st.integers(0, 10**6), st.integers(1, 500), st.integers(1, 100),
       st.integers(0, 2000))
def test_windows_cover_and_index(t0, width, step, extra):
    t1 = t0 + width + extra
    ws = sliding_windows(t0, t1, width, step)
    assert ws[0].t_start == t0
    assert ws[-1].t_end <= t1 < ws[-1].t_end + step
    assert [w.index for w in ws] == list(range(len(ws)))


def test_slice_half_open():
    st_ = stream_of(arp(9, "A", 1, 1), arp(10, "A", 1, 1),
                    arp(19, "A", 1, 1), arp(20, "A", 1, 1))
    sl = window_slice(st_, Window(0, 10, 20))
    assert [r.timestamp for r in sl] == [10, 19]


def test_expanding_slice_closed():
    st_ = stream_of(arp(5, "A", 1, 1), arp(10, "A", 1, 1), arp(11, "A", 1, 1))
    assert [r.timestamp for r in expanding_slice(st_, 10)] == [5, 10]


def test_empty_stream_slices():
    from lanwatch.ingest import EventStream
    empty = EventStream(())
    assert len(window_slice(empty, Window(0, 0, 10))) == 0
    assert len(expanding_slice(empty, 10)) == 0


def test_hour_rounding():
    assert floor_hour(3601) == 3600
    assert floor_hour(3600) == 3600
    assert ceil_hour(3601) == 7200
    assert ceil_hour(3600) == 3600
