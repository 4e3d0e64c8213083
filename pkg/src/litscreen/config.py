"""Service configuration: TOML file plus LITSCREEN_* environment overrides.

See config.example.toml in the repo root for the documented key set.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib

from litscreen.errors import ValidationError


@dataclass
class ConnectorConfig:
    name: str
    kind: str  # "wire" | "semantic_scholar" | "core" | "pubmed"
    base_url: str
    api_key_env: str | None = None
    rate_limit: float = 1.0  # requests per second
    supports_year_filter: bool = True
    max_page_size: int = 100

    def __post_init__(self):
        if self.rate_limit <= 0:
            raise ValidationError(f"connector {self.name}: rate_limit must be > 0")
        if self.max_page_size < 1:
            raise ValidationError(f"connector {self.name}: max_page_size must be >= 1")


@dataclass
class ClassifierConfig:
    l2: float = 1e-4
    logreg_lr: float = 2.0
    logreg_max_epochs: int = 1000
    logreg_tol: float = 1e-6
    hash_buckets: int = 2**18
    hash_dim: int = 16
    hash_lr: float = 0.1
    hash_epochs: int = 25
    hash_seed: int = 13


def _default_connectors() -> list[ConnectorConfig]:
    return [
        ConnectorConfig(
            name="semantic_scholar",
            kind="semantic_scholar",
            base_url="https://api.semanticscholar.org/graph/v1",
            api_key_env="SEMANTIC_SCHOLAR_API_KEY",
            max_page_size=100,
        ),
        ConnectorConfig(
            name="core",
            kind="core",
            base_url="https://api.core.ac.uk/v3",
            api_key_env="CORE_API_KEY",
            max_page_size=100,
        ),
        ConnectorConfig(
            name="pubmed",
            kind="pubmed",
            base_url="https://eutils.ncbi.nlm.nih.gov/entrez/eutils",
            api_key_env="PUBMED_API_KEY",
            max_page_size=200,
        ),
        ConnectorConfig(
            name="internal",
            kind="wire",
            base_url="http://localhost:8090",
            max_page_size=100,
        ),
    ]


@dataclass
class Settings:
    store_url: str = "sqlite:///litscreen.db"
    host: str = "127.0.0.1"
    port: int = 8000
    auth_enabled: bool = False
    reviewer_tokens: dict[str, str] = field(default_factory=dict)  # reviewer -> token
    default_top_n: int = 500
    dedup_threshold: float = 0.90
    dedup_blocking: bool = True
    connectors: list[ConnectorConfig] = field(default_factory=_default_connectors)
    connector_timeout: float = 30.0
    model_base_url: str = "http://localhost:8081"
    model_id: str = "stub-t2t"
    max_new_tokens: int = 16
    qa_concurrency: int = 2
    grobid_base_url: str = "http://localhost:8070"
    grobid_concurrency: int = 2
    upload_max_bytes: int = 20 * 1024 * 1024
    ranked_screening: bool = False
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    ui_dir: str | None = None

    def connector_map(self) -> dict[str, ConnectorConfig]:
        return {c.name: c for c in self.connectors}


# env var name -> (settings attribute, caster)
_ENV_OVERRIDES = {
    "LITSCREEN_STORE_URL": ("store_url", str),
    "LITSCREEN_HOST": ("host", str),
    "LITSCREEN_PORT": ("port", int),
    "LITSCREEN_AUTH_ENABLED": ("auth_enabled", lambda v: v.lower() in ("1", "true", "yes")),
    "LITSCREEN_DEDUP_THRESHOLD": ("dedup_threshold", float),
    "LITSCREEN_DEDUP_BLOCKING": ("dedup_blocking", lambda v: v.lower() in ("1", "true", "yes")),
    "LITSCREEN_MODEL_BASE_URL": ("model_base_url", str),
    "LITSCREEN_MODEL_ID": ("model_id", str),
    "LITSCREEN_GROBID_BASE_URL": ("grobid_base_url", str),
    "LITSCREEN_UI_DIR": ("ui_dir", str),
}


def load_settings(path: str | Path | None = None, env: dict[str, str] | None = None) -> Settings:
    env = os.environ if env is None else env
    settings = Settings()
    if path is not None:
        raw = tomllib.loads(Path(path).read_text(encoding="utf-8"))
        settings = _apply_toml(settings, raw)
    for var, (attr, cast) in _ENV_OVERRIDES.items():
        if var in env:
            try:
                setattr(settings, attr, cast(env[var]))
            except ValueError as exc:
                raise ValidationError(f"bad value for {var}: {env[var]}") from exc
    _validate(settings)
    return settings


def _apply_toml(settings: Settings, raw: dict) -> Settings:
    server = raw.get("server", {})
    settings.host = server.get("host", settings.host)
    settings.port = server.get("port", settings.port)
    settings.auth_enabled = server.get("auth_enabled", settings.auth_enabled)
    settings.ui_dir = server.get("ui_dir", settings.ui_dir)

    store = raw.get("store", {})
    settings.store_url = store.get("url", settings.store_url)

    search = raw.get("search", {})
    settings.default_top_n = search.get("default_top_n", settings.default_top_n)
    settings.connector_timeout = search.get("timeout", settings.connector_timeout)

    dedup = raw.get("dedup", {})
    settings.dedup_threshold = dedup.get("threshold", settings.dedup_threshold)
    settings.dedup_blocking = dedup.get("blocking", settings.dedup_blocking)

    if "connector" in raw:
        settings.connectors = [
            ConnectorConfig(
                name=c["name"],
                kind=c.get("kind", "wire"),
                base_url=c["base_url"],
                api_key_env=c.get("api_key_env"),
                rate_limit=c.get("rate_limit", 1.0),
                supports_year_filter=c.get("supports_year_filter", True),
                max_page_size=c.get("max_page_size", 100),
            )
            for c in raw["connector"]
        ]

    model = raw.get("model", {})
    settings.model_base_url = model.get("base_url", settings.model_base_url)
    settings.model_id = model.get("model_id", settings.model_id)
    settings.max_new_tokens = model.get("max_new_tokens", settings.max_new_tokens)
    settings.qa_concurrency = model.get("concurrency", settings.qa_concurrency)

    grobid = raw.get("grobid", {})
    settings.grobid_base_url = grobid.get("base_url", settings.grobid_base_url)
    settings.grobid_concurrency = grobid.get("concurrency", settings.grobid_concurrency)

    ingest = raw.get("ingest", {})
    settings.upload_max_bytes = ingest.get("upload_max_bytes", settings.upload_max_bytes)

    screening = raw.get("screening", {})
    settings.ranked_screening = screening.get("ranked_queue", settings.ranked_screening)

    clf = raw.get("classifier", {})
    settings.classifier = ClassifierConfig(
        l2=clf.get("l2", settings.classifier.l2),
        logreg_lr=clf.get("logreg_lr", settings.classifier.logreg_lr),
        logreg_max_epochs=clf.get("logreg_max_epochs", settings.classifier.logreg_max_epochs),
        logreg_tol=clf.get("logreg_tol", settings.classifier.logreg_tol),
        hash_buckets=clf.get("hash_buckets", settings.classifier.hash_buckets),
        hash_dim=clf.get("hash_dim", settings.classifier.hash_dim),
        hash_lr=clf.get("hash_lr", settings.classifier.hash_lr),
        hash_epochs=clf.get("hash_epochs", settings.classifier.hash_epochs),
        hash_seed=clf.get("hash_seed", settings.classifier.hash_seed),
    )

    auth = raw.get("auth", {})
    if "tokens" in auth:
        settings.reviewer_tokens = dict(auth["tokens"])
    return settings


def _validate(settings: Settings) -> None:
    if not (0.0 < settings.dedup_threshold <= 1.0):
        raise ValidationError("dedup threshold must lie in (0, 1]")
    if settings.default_top_n < 1:
        raise ValidationError("default_top_n must be >= 1")
    names = [c.name for c in settings.connectors]
    if len(names) != len(set(names)):
        raise ValidationError("connector names must be unique")
    if settings.auth_enabled and not settings.reviewer_tokens:
        raise ValidationError("auth enabled but no reviewer tokens configured")
