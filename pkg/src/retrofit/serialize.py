"""Stable JSON serialization shared by the CLI and the HTTP service.

Payloads are dicts built in a fixed key order; serializing them compactly
makes equal logical responses byte-identical wherever they are produced.
"""

import json


def dumps_stable(payload) -> str:
    return json.dumps(payload, ensure_ascii=False, separators=(",", ":"),
                      allow_nan=False)
