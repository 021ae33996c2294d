"""Persisted workspace: artifacts, config snapshot, and provenance manifest.

Every artifact written into the workspace is recorded in manifest.json
together with the digests of the inputs and the config values that
produced it. Reading an artifact re-checks that chain, so a command never
silently consumes output that no longer matches its sources; --force
bypasses the check. Writes are atomic (temp file plus rename).
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import StaleArtifactError, ValidationError

MANIFEST_NAME = "manifest.json"
CONFIG_NAME = "config.json"


@dataclass(frozen=True)
class Config:
    window_days: int = 30
    distance_transform: str = "inverse"
    pagerank_damping: float = 0.85
    vif_threshold: float = 5.0
    variance_threshold: float = 0.2
    badge_mode: str = "quantile"
    badge_quantile: float = 0.9
    badge_threshold: float = 0.0
    min_collaborators: int = 5
    seed: int = 0

    def __post_init__(self) -> None:
        if self.window_days < 1:
            raise ValidationError("window_days must be at least 1")
        if self.distance_transform not in ("inverse", "raw"):
            raise ValidationError("distance_transform must be inverse or raw")
        if not 0.0 < self.pagerank_damping < 1.0:
            raise ValidationError("pagerank_damping must lie in (0, 1)")
        if self.vif_threshold <= 0:
            raise ValidationError("vif_threshold must be positive")
        if self.variance_threshold <= 0:
            raise ValidationError("variance_threshold must be positive")
        if self.badge_mode not in ("quantile", "absolute"):
            raise ValidationError("badge_mode must be quantile or absolute")
        if not 0.0 < self.badge_quantile < 1.0:
            raise ValidationError("badge_quantile must lie in (0, 1)")
        if self.min_collaborators < 1:
            raise ValidationError("min_collaborators must be at least 1")

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValidationError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)


def digest_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def digest_file(path: Path) -> str:
    try:
        return digest_bytes(Path(path).read_bytes())
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc


class Workspace:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.root / name

    def _atomic_write(self, name: str, data: bytes) -> None:
        fd, tmp = tempfile.mkstemp(dir=self.root, prefix=f".{name}.")
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(data)
            os.replace(tmp, self.path(name))
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    def _load_manifest(self) -> dict:
        path = self.path(MANIFEST_NAME)
        if not path.exists():
            return {"artifacts": {}}
        try:
            return json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read {path}: {exc}") from exc

    def _save_manifest(self, manifest: dict) -> None:
        data = json.dumps(manifest, sort_keys=True, indent=2) + "\n"
        self._atomic_write(MANIFEST_NAME, data.encode("utf-8"))

    def write_artifact(
        self,
        name: str,
        data: bytes,
        inputs: dict[str, str] | None = None,
        config: dict | None = None,
    ) -> None:
        """Atomically write an artifact and record its provenance."""
        self._atomic_write(name, data)
        manifest = self._load_manifest()
        manifest["artifacts"][name] = {
            "digest": digest_bytes(data),
            "inputs": dict(sorted((inputs or {}).items())),
            "config": dict(sorted((config or {}).items())),
        }
        self._save_manifest(manifest)

    def read_artifact(self, name: str, force: bool = False) -> bytes:
        """Read an artifact, refusing stale or unrecorded inputs unless forced."""
        path = self.path(name)
        if not path.exists():
            raise ValidationError(
                f"workspace artifact {name!r} not found in {self.root};"
                f" run the producing command first"
            )
        data = path.read_bytes()
        if force:
            return data
        entry = self._load_manifest()["artifacts"].get(name)
        if entry is None:
            raise StaleArtifactError(
                f"{name} has no provenance record in {MANIFEST_NAME};"
                f" re-run its producing command or pass --force"
            )
        if digest_bytes(data) != entry["digest"]:
            raise StaleArtifactError(
                f"{name} was modified after it was produced;"
                f" re-run its producing command or pass --force"
            )
        for label, recorded in entry.get("inputs", {}).items():
            candidate = self.path(label)
            if not candidate.exists():
                candidate = Path(label)
            if not candidate.exists():
                continue  # vanished external input: nothing to compare against
            if digest_file(candidate) != recorded:
                raise StaleArtifactError(
                    f"{name} is stale: input {label} changed since it was"
                    f" produced; re-run the producing command or pass --force"
                )
        return data

    def artifact_digest(self, name: str) -> str:
        return digest_file(self.path(name))

    def manifest_entry(self, name: str) -> dict:
        return self._load_manifest()["artifacts"].get(name, {})

    def write_config(self, config: Config) -> None:
        data = json.dumps(config.to_dict(), sort_keys=True, indent=2) + "\n"
        self._atomic_write(CONFIG_NAME, data.encode("utf-8"))

    def read_config(self) -> Config:
        path = self.path(CONFIG_NAME)
        if not path.exists():
            return Config()
        try:
            return Config.from_dict(json.loads(path.read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValidationError(f"cannot read {path}: {exc}") from exc
