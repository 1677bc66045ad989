import numpy as np


def synthetic_udata(path, n_users=943, n_items=1682, n_ratings=100_000, rank=3, seed=0):
    """Write a u.data-format file of 1..5 ratings from a noisy low-rank model.

    Stands in for the real MovieLens file, which is not redistributable and
    may be absent from the test machine.
    """
    rng = np.random.default_rng(seed)
    pick = rng.choice(n_users * n_items, size=n_ratings, replace=False)
    users, items = np.divmod(pick, n_items)
    # every user and item appears at least once so the id ranges are dense
    users[:n_users] = np.arange(n_users)
    items[n_users:n_users + n_items] = np.arange(n_items)
    lin = users * n_items + items
    _, keep = np.unique(lin, return_index=True)
    users, items = users[keep], items[keep]
    a = rng.standard_normal((n_users, rank))
    b = rng.standard_normal((n_items, rank))
    score = np.einsum("ij,ij->i", a[users], b[items]) / np.sqrt(rank) + 0.7 * rng.standard_normal(users.size)
    ratings = np.clip(np.round(3.5 + 1.1 * score), 1, 5).astype(int)
    stamps = 874_724_710 + rng.integers(0, 10**7, users.size)
    with open(path, "w") as fh:
        for u, i, r, t in zip(users + 1, items + 1, ratings, stamps):
            fh.write(f"{u}\t{i}\t{r}\t{t}\n")
    return path


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE = {}


def record_acceptance(number, passed, text):
    line = f"criterion {number!s:>7}: {'PASS' if passed else 'FAIL'}  {text}"
    ACCEPTANCE[str(number)] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    def order(key):
        head = "".join(ch for ch in key if ch.isdigit())
        return int(head or 0), key

    for number in sorted(ACCEPTANCE, key=order):
        terminalreporter.write_line(ACCEPTANCE[number])
