"""Shared builders for tests: ad-hoc links, topologies, random instances.

Also hosts the acceptance reporter: criterion PASS/FAIL lines collected by
tests/test_acceptance.py are replayed in the terminal summary, where pytest
output capture cannot hide them.
"""

import math

import numpy as np
import pytest

acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.write_line(line)

from sinrsched.geometry import Link, NetworkTopology, Point2D
from sinrsched.interference import PowerModel, SINRParams
from sinrsched.mwisl import LocalInstance


def mk_link(lid, sx, sy, rx, ry):
    return Link(lid, Point2D(sx, sy), Point2D(rx, ry))


def mk_net(links):
    """Topology from explicit links; r/R taken from the observed lengths."""
    lengths = [l.length for l in links]
    nodes = tuple(l.sender for l in links) + tuple(l.receiver for l in links)
    return NetworkTopology(
        nodes=nodes, links=tuple(links), r=min(lengths), R=max(lengths)
    )


def random_links(rng, n, box=6.0, lmin=0.5, lmax=1.5):
    """n random links in a box with lengths uniform-area in [lmin, lmax]."""
    links = []
    for i in range(n):
        sx, sy = rng.uniform(0, box, 2)
        radius = math.sqrt(rng.uniform(lmin**2, lmax**2))
        theta = rng.uniform(0, 2 * math.pi)
        links.append(
            mk_link(i, sx, sy, sx + radius * math.cos(theta), sy + radius * math.sin(theta))
        )
    return links


def uniform_setup(links, sigma=1.0, xi=1e-3):
    """Uniform-power physics sized so every test link is alone-schedulable."""
    net = mk_net(links)
    eta = min(1.0, 0.9 * net.r**3)
    sp = SINRParams(eta=eta, kappa=3.0, sigma=sigma, xi=xi, r=net.r, R=net.R)
    return net, PowerModel.uniform(1.0), sp


def linear_setup(links, sigma=1.0, xi=1e-3, beta=1.0):
    net = mk_net(links)
    eta = min(1.0, 0.9 * net.r**3)
    c = 0.5 / net.R**beta
    sp = SINRParams(eta=eta, kappa=3.0, sigma=sigma, xi=xi, r=net.r, R=net.R)
    return net, PowerModel.linear(c, beta, 1.0), sp


def random_instance(rng, n, threshold, power="uniform", box=5.0):
    links = random_links(rng, n, box=box)
    if power == "uniform":
        net, pm, sp = uniform_setup(links)
    else:
        net, pm, sp = linear_setup(links)
    weights = tuple(float(rng.integers(1, 100)) for _ in range(n))
    return LocalInstance(links=tuple(links), weights=weights, threshold=threshold), net, pm, sp


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
