import pytest

from pairscale import ImageRecord, kernels


def make_records(mos_values, stds=None, dataset="demo", groups=None, prefix="img"):
    """Build a record list from parallel value lists."""
    n = len(mos_values)
    stds = stds if stds is not None else [0.25] * n
    groups = groups if groups is not None else [None] * n
    width = max(3, len(str(n)))
    return [
        ImageRecord(f"{prefix}_{k:0{width}d}", float(m), float(s), g, dataset)
        for k, (m, s, g) in enumerate(zip(mos_values, stds, groups))
    ]


@pytest.fixture(params=kernels.available_backends())
def kernel_backend(request):
    """Run the decorated test once per available kernel backend."""
    with kernels.use_backend(request.param):
        yield request.param
