from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from tqdm import tqdm

T = TypeVar("T")
R = TypeVar("R")


def parallel_map(
    func: Callable[[T], R],
    items: Iterable[T],
    n_jobs: int = 1,
    desc: str | None = None,
    show_progress: bool = False,
) -> list[R]:
    """Applies ``func`` to every item, in threads when ``n_jobs > 1``; results keep the input order."""
    items = list(items)
    if n_jobs <= 1 or len(items) <= 1:
        return [func(item) for item in tqdm(items, desc=desc, disable=not show_progress)]
    with ThreadPoolExecutor(max_workers=n_jobs) as executor:
        return list(tqdm(executor.map(func, items), total=len(items), desc=desc, disable=not show_progress))
