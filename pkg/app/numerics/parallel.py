"""
Ordered parallel map over row blocks.

Results are assembled in input order so a threaded run equals the serial one.
"""
from collections import deque
from concurrent.futures import ThreadPoolExecutor


def row_blocks(n_rows, block_size):
    """Consecutive (start, stop) bounds covering range(n_rows)."""
    block_size = max(1, int(block_size))
    return [(start, min(start + block_size, n_rows)) for start in range(0, n_rows, block_size)]


def iter_ordered_map(fn, items, threads=1, window=None):
    """Lazily yield fn(item) in input order.

    With threads > 1 at most `window` calls (default 2 * threads) are pending,
    so only that many results are alive ahead of the consumer.
    """
    if threads <= 1:
        for item in items:
            yield fn(item)
        return
    window = max(1, int(window or 2 * threads))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        pending = deque()
        for item in items:
            pending.append(pool.submit(fn, item))
            if len(pending) >= window:
                yield pending.popleft().result()
        while pending:
            yield pending.popleft().result()


def ordered_map(fn, items, threads=1):
    """list(map(fn, items)), optionally on a thread pool."""
    return list(iter_ordered_map(fn, items, threads))
