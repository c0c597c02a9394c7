"""Shared fixtures: group families and an S3 multiplication table built from
an independent permutation-composition oracle."""

import pytest

from soficrank import FiniteTable, Free, FreeAbelian


def then_perms(p, q):
    """Product 'apply p, then q' (independent of the package's helpers)."""
    return tuple(q[p[x]] for x in range(len(p)))


def s3_elements():
    """S3 as permutation tuples in the fixed order e,(12),(13),(23),(123),(132)."""
    return [
        (0, 1, 2),  # e
        (1, 0, 2),  # (12)
        (2, 1, 0),  # (13)
        (0, 2, 1),  # (23)
        (1, 2, 0),  # (123): 0->1->2->0
        (2, 0, 1),  # (132)
    ]


def build_s3_table():
    elems = s3_elements()
    index = {p: i for i, p in enumerate(elems)}
    table = [
        [index[then_perms(p, q)] for q in elems] for p in elems
    ]
    return table


@pytest.fixture(scope="session")
def s3():
    names = ("e", "s12", "s13", "s23", "r123", "r132")
    return FiniteTable(build_s3_table(), identity_index=0, names=names)


@pytest.fixture(scope="session")
def f2():
    return Free(2)


@pytest.fixture(scope="session")
def z1():
    return FreeAbelian(1)


@pytest.fixture(scope="session")
def z2grid():
    return FreeAbelian(2)
