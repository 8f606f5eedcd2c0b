"""Fixture-mode download trees: files plus Zone.Identifier sidecars."""

from pathlib import Path

from app.models import OriginMetadata
from app.services.origin_meta import format_zone_identifier, sidecar_path


def make_download(
    root: Path,
    name: str,
    data: bytes,
    hu: str | None = None,
    ru: str | None = None,
) -> Path:
    """Write a file and, when any URL is given, its provenance sidecar."""
    path = root / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(data)
    if hu is not None or ru is not None:
        origin = OriginMetadata(zone_id=3, referrer_url=ru, host_url=hu)
        sidecar_path(path).write_text(format_zone_identifier(origin), encoding="utf-8")
    return path
