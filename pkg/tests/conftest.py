import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--bless",
        action="store_true",
        default=False,
        help="regenerate golden files instead of comparing against them",
    )


@pytest.fixture
def bless(request):
    return request.config.getoption("--bless")
