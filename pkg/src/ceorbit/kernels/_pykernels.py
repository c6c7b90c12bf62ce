"""Pure-Python kernels.  Same contracts as the compiled ``_ckernels``."""

from itertools import permutations, product

from ..coding import pair


def submasks(mask: int) -> list[int]:
    out = []
    sub = mask
    while True:
        out.append(sub)
        if sub == 0:
            break
        sub = (sub - 1) & mask
    return out


def eset_level_codes(k: int, masks) -> list[int]:
    """Codes of (k, r_0, ..., r_{n-1}) with some permutation pi making r_t a
    submask of masks[pi(t)] for every t.  Sorted, duplicate-free."""
    masks = tuple(masks)
    n = len(masks)
    codes = set()
    for arrangement in set(permutations(masks)):
        for rs in product(*(submasks(m) for m in arrangement)):
            code = rs[n - 1]
            for t in range(n - 2, -1, -1):
                code = pair(rs[t], code)
            codes.add(pair(k, code))
    return sorted(codes)
