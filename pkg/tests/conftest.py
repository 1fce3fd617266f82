import shutil
import tempfile
from datetime import datetime, timedelta, timezone

import pytest

from citadel import fixtures, registry
from citadel.api import create_app
from citadel.config import Config
from citadel.core import AppContext
from citadel.domain import Role

REGISTRAR_USERNAME = "STF/0001"
REGISTRAR_PASSWORD = "registrar-pass"

# inside the demo fixture's quiz window
IN_WINDOW = datetime(2024, 9, 15, 10, 0, 0, tzinfo=timezone.utc)


class FakeClock:
    """Settable clock injected everywhere the services read time."""

    def __init__(self, start=None):
        self.now = start or datetime(2024, 9, 1, 8, 0, 0, tzinfo=timezone.utc)

    def __call__(self):
        return self.now

    def set(self, dt):
        self.now = dt

    def advance(self, seconds=0, minutes=0, hours=0, days=0):
        self.now += timedelta(seconds=seconds, minutes=minutes, hours=hours, days=days)


@pytest.fixture
def clock():
    return FakeClock()


@pytest.fixture
def ctx(tmp_path, clock):
    context = AppContext(Config(data_dir=str(tmp_path / "data")), clock=clock)
    yield context
    context.close()


def bootstrap_registrar(context):
    return registry.create_user(
        context, REGISTRAR_USERNAME, REGISTRAR_PASSWORD, "Registrar", "", "",
        Role.REGISTRAR, id="usr-registrar",
    )


@pytest.fixture(scope="session")
def seed_template(tmp_path_factory):
    """Seed the demo fixture once; tests copy the data directory."""
    template = tmp_path_factory.mktemp("seed-template") / "data"
    context = AppContext(Config(data_dir=str(template)), clock=FakeClock())
    bootstrap_registrar(context)
    fixtures.seed(context)
    context.close()
    return template


@pytest.fixture
def seeded_ctx(tmp_path, clock, seed_template):
    data_dir = tmp_path / "data"
    shutil.copytree(seed_template, data_dir)
    context = AppContext(Config(data_dir=str(data_dir)), clock=clock)
    yield context
    context.close()


@pytest.fixture
def app(seeded_ctx):
    return create_app(seeded_ctx)


@pytest.fixture
def client(app):
    from fastapi.testclient import TestClient
    return TestClient(app)


def login(client, username, password):
    response = client.post("/api/login", json={"username": username, "password": password})
    assert response.status_code == 200, response.text
    return {"Authorization": f"Bearer {response.json()['token']}"}


@pytest.fixture
def registrar_headers(client):
    return login(client, REGISTRAR_USERNAME, REGISTRAR_PASSWORD)


@pytest.fixture
def student_headers(client):
    # usr-s001: CS department, enrolled in COS101, COS201, MTH101
    return login(client, "BU/21/0001", fixtures.student_password(1))


@pytest.fixture
def lecturer_headers(client):
    # usr-l01 teaches COS101
    return login(client, "STF/1001", fixtures.lecturer_password(1))
