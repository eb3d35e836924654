"""Regenerate corpus.jsonl and truth.csv (deterministic)."""

import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

WORDS = """
apple banner candle dragon ember falcon garden harbor island jungle kettle ladder
meadow needle orchard pepper quartz ribbon saddle thunder umbrella velvet walnut
yonder zephyr anchor blossom cactus dolphin engine feather glacier hammock igloo
jasmine kayak lantern marble nectar oyster pillow quiver raven sparrow tulip
unicorn violet willow xylophone yogurt zebra acorn bramble copper dune eclipse
fjord granite hazel indigo juniper kelp lilac mango nutmeg olive prism quill
rustle summit timber urchin vortex wander yarrow zinnia alpine beacon cobalt
drizzle ember2 fossil gravel heron ivory jigsaw koala lagoon mosaic nomad opal
puzzle quasar ripple saffron trellis upland vessel whisker yonder2 zodiac amber
bison canyon delta falcon2 geyser hollow inkwell jetty kiln lotus mirage nebula
orbit pebble quarry reef sierra tundra utopia valley wharf yeti zenith aurora
basalt cedar dahlia estuary fern grotto hemlock iris jade knoll larch maple
""".split()

BASE = datetime(2021, 6, 1, tzinfo=timezone.utc)
_cursor = 0


def varied(n):
    """n comments with pairwise disjoint vocabularies."""
    global _cursor
    out = []
    for _ in range(n):
        words = [WORDS[(_cursor + k) % len(WORDS)] for k in range(4)]
        _cursor += 4
        out.append(" ".join(words).capitalize() + ".")
    return out


def main():
    records = []

    def add(repo, who, bodies, source="issue"):
        for i, body in enumerate(bodies):
            records.append({
                "repo": repo,
                "contributor": who,
                "created_at": (BASE + timedelta(hours=len(records))).strftime("%Y-%m-%dT%H:%M:%SZ"),
                "body": body,
                "source": source if i % 2 else "pull_request",
                "id": str(1000 + len(records)),
            })

    bump = [f"Bumps serde from 1.0.{i} to 1.0.{i + 1}. See https://github.com/serde-rs/serde/releases" for i in range(20)]
    add("acme/widgets", "depbot", bump)
    add("acme/gadgets", "depbot", bump[:15])
    add("tools/forge", "depbot", varied(12))

    build = [f"Build #{i} succeeded: https://ci.example.org/job/{i}" for i in range(30)]
    add("acme/widgets", "ci-bot", build)
    add("acme/gadgets", "ci-bot", build[:5])
    add("tools/forge", "ci-bot", build[:12])

    add("acme/widgets", "alice", varied(15))
    add("acme/gadgets", "Alice", varied(12))

    add("acme/widgets", "bob", varied(12))
    add("tools/forge", "bob", ["bors r+"] * 14)
    add("acme/gadgets", "bob", varied(11))

    add("acme/gadgets", "carol", varied(3))
    add("tools/forge", "dave", varied(10))

    here = Path(__file__).parent
    with open(here / "corpus.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    (here / "truth.csv").write_text(
        "contributor,type\ndepbot,bot\nci-bot,bot\nalice,human\nbob,human\ncarol,human\ndave,human\n",
        encoding="utf-8",
    )


if __name__ == "__main__":
    main()
