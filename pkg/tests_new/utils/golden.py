"""Golden JSON documents pinning the --json output schemas."""

import json
import re
from pathlib import Path
from typing import Any

GOLDEN_DIR = Path(__file__).parent.parent / "fixtures" / "golden"
TIMESTAMP_RE = re.compile(r"^\d{4}-\d{2}-\d{2}T\d{2}:\d{2}:\d{2}(\.\d+)?(Z|[+-]\d{2}:\d{2})?$")


def mask(value: Any, root: str) -> Any:
    """Replace timestamps with <timestamp> and the root prefix of paths with <root>."""
    if isinstance(value, dict):
        return {key: mask(item, root) for key, item in value.items()}
    if isinstance(value, list):
        return [mask(item, root) for item in value]
    if isinstance(value, str):
        if TIMESTAMP_RE.match(value):
            return "<timestamp>"
        prefix = root.rstrip("/")
        if value == prefix or value.startswith(prefix + "/"):
            return "<root>" + value[len(prefix) :]
    return value


def masked(document: dict[str, Any], root: Path | str) -> Any:
    """The document as --json prints it, parsed back and masked."""
    return mask(json.loads(json.dumps(document)), str(root))


def load_golden(name: str) -> Any:
    return json.loads((GOLDEN_DIR / f"{name}.json").read_text(encoding="utf-8"))
