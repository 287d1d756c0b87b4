#!/usr/bin/env python3
"""Count element kinds directly from a MinerU-style layout file.

Independent of the Rust adapter: it walks the raw JSON and applies the label
table below. Writes <doc>.manifest.json next to the input.

    python3 tools/count_kinds.py fixtures/docs/netflix10k.mineru.json
"""

import collections
import json
import sys

LABELS = {
    "title": "title", "text": "paragraph", "list": "paragraph_or_list",
    "table_body": "table", "table_caption": "table_caption", "table_footnote": "table_footnote",
    "image_body": "image", "image_caption": "image_caption", "image_footnote": "image_footnote",
    "chart_body": "chart", "chart_caption": "image_caption", "chart_footnote": "image_footnote",
    "interline_equation": "formula", "code": "code", "page_footnote": "footnote",
    "header": "header", "footer": "footer", "page_number": "page_number", "index": "toc_entry",
}


def leaves(block):
    if block.get("blocks"):
        for child in block["blocks"]:
            yield from leaves(child)
    else:
        yield block


def main(path):
    with open(path, encoding="utf-8") as f:
        doc = json.load(f)
    counts = collections.Counter()
    pages = 0
    for page in doc["pdf_info"]:
        pages += 1
        for key in ("para_blocks", "discarded_blocks"):
            for block in page.get(key, []):
                for leaf in leaves(block):
                    kind = LABELS.get(leaf["type"], "paragraph")
                    if kind == "paragraph_or_list":
                        kind = "list"
                    counts[kind] += 1
    manifest = {
        "source": path.rsplit("/", 1)[-1],
        "pages": pages,
        "blocks": sum(counts.values()),
        "kinds": dict(sorted(counts.items())),
        "noise_blocks": counts["header"] + counts["footer"] + counts["page_number"],
    }
    out = path.replace(".mineru.json", ".manifest.json")
    with open(out, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2)
        f.write("\n")
    print(json.dumps(manifest))


if __name__ == "__main__":
    for p in sys.argv[1:]:
        main(p)
