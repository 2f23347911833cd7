import pytest


@pytest.fixture
def announce(capsys):
    """Print a pass/fail line to the real terminal even under capture."""

    def go(num: int, name: str, ok: bool) -> None:
        with capsys.disabled():
            print(f"acceptance {num:02d} {name}: {'PASS' if ok else 'FAIL'}",
                  flush=True)

    return go
