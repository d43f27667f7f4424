"""Reference implementations written straight from the definitions, in plain
Python, independent of the vectorised kernel."""

import math


def rows_of(dataset, channel="true"):
    y = dataset.labels if channel == "true" else dataset.predictions
    return [[float(y[i])] + [float(v) for v in dataset.features[i]] for i in range(dataset.n)]


def brute_attr_distance(dataset, attr, channel="true"):
    pts = rows_of(dataset, channel)
    groups = [int(g) for g in dataset.sensitive[:, attr]]
    mins = []
    for i, p in enumerate(pts):
        mins.append(min(math.dist(p, q) for j, q in enumerate(pts) if groups[j] != groups[i]))
    return max(mins), sum(mins) / len(mins), mins


def brute_two_set(first, second):
    forward = max(min(math.dist(p, q) for q in second) for p in first)
    backward = max(min(math.dist(p, q) for p in first) for q in second)
    return max(forward, backward)
