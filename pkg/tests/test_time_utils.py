from datetime import date

import pytest

from utils.time_utils import add_months, format_duration, get_current_time, observation_end


@pytest.mark.parametrize('start, months, expected', [
    (date(2013, 1, 31), 1, date(2013, 2, 28)),
    (date(2013, 1, 1), 6, date(2013, 7, 1)),
    (date(2012, 8, 31), 6, date(2013, 2, 28)),
])
def test_add_months(start, months, expected):
    assert add_months(start, months) == expected


def test_observation_end_is_inclusive():
    assert observation_end(date(2013, 1, 1), 6) == date(2013, 6, 30)


@pytest.mark.parametrize('seconds, text', [(0, '00:00:00'), (-5, '00:00:00'), (3725.9, '01:02:05')])
def test_format_duration(seconds, text):
    assert format_duration(seconds) == text


def test_current_time_is_zone_aware():
    assert get_current_time('Asia/Dhaka').utcoffset() is not None
