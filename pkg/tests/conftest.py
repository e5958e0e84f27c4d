"""Shared fixtures: the expensive density grids and censuses are computed once
per session and reused across test modules."""

from __future__ import annotations

import pytest

from ksrefine import density_profile, elliptic_census, hyperelliptic_census


@pytest.fixture(scope="session")
def density3():
    return density_profile(3)


@pytest.fixture(scope="session")
def density2():
    return density_profile(2, step=0.01)


@pytest.fixture(scope="session")
def hyp_g2():
    return {q: hyperelliptic_census(2, q) for q in (5, 7, 11, 13)}


@pytest.fixture(scope="session")
def ell_small():
    return {q: elliptic_census(q) for q in (5, 7, 11, 13)}
