"""Smoke test for the pyglyphforge extension.

Build and run:
    cargo build --release -p glyphforge-py --features extension-module
    cp target/release/libpyglyphforge.so python/pyglyphforge.so
    python3 python/smoke_test.py
"""
import math
import os
import sys
import tempfile

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import pyglyphforge as gf


def main():
    assert [gf.block_side(m, 1) for m in (48, 64, 65, 200)] == [64, 128, 256, 1024]

    q = gf.Quad([(1, 2), (9, 1), (10, 6), (2, 7)])
    assert q.bounding_rect() == (1, 1, 9, 6)
    block = gf.make_block(gf.Quad.from_rect(480, 480, 64, 64), 1024, 1024)
    assert block.side_raw == 128 and block.side_effective == 128
    inner = gf.Quad.from_rect(490, 500, 30, 12)
    back = block.to_image(block.to_block(inner))
    assert all(math.dist(a, b) < 1e-9 for a, b in zip(back.points(), inner.points()))

    assert abs(gf.one_minus_ned("abc", "abd") - 2 / 3) < 1e-12
    assert gf.levenshtein("kitten", "sitting") == 3
    assert gf.recognition_accuracy([("Sale", "sale"), ("exit", "exit")], case_sensitive=False) == 1.0
    a, b = gf.Quad.from_rect(0, 0, 1, 1), gf.Quad.from_rect(0.5, 0, 1, 1)
    assert abs(gf.polygon_iou(a, b) - 1 / 3) < 1e-12
    det = gf.detection_prf([a], [a, b])
    assert (det["tp"], det["fp"], det["fn"]) == (1, 0, 1)

    with tempfile.TemporaryDirectory() as tmp:
        bg, aux = gf.write_fixtures(os.path.join(tmp, "fix"), 2, 256, 192, seed=3)
        words = ["market", "exit", "Open", "coffee"]
        d1 = gf.synthesize(bg, aux, os.path.join(tmp, "a"), words, 3, seed=11, jobs=2)
        d2 = gf.synthesize(bg, aux, os.path.join(tmp, "b"), words, 3, seed=11, jobs=1)
        assert d1 == d2, (d1, d2)
        ok, checks = gf.validate_dataset(os.path.join(tmp, "a"))
        assert ok, checks
        try:
            gf.synthesize(bg, aux, os.path.join(tmp, "c"), [], 3)
        except ValueError:
            pass
        else:
            raise AssertionError("empty lexicon accepted")

    print("pyglyphforge", gf.__version__, "smoke test ok")


if __name__ == "__main__":
    main()
