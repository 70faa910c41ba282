import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp
from PIL import Image

from conftest import write_png_gray, write_png_rgb
from irisforge import (
    BinaryMask,
    CorruptImageError,
    GrayImage,
    ShapeMismatchError,
    UnsupportedImageError,
    load_gray_image,
    load_mask,
    resize_mask_nn,
    save_gray_image,
    save_mask,
)
from irisforge.imgcore import require_same_shape


class TestContainers:
    def test_gray_image_dimensions(self):
        img = GrayImage(np.zeros((3, 5), dtype=np.uint8))
        assert (img.height, img.width) == (3, 5)

    def test_rejects_empty_and_non_2d(self):
        with pytest.raises(ValueError):
            GrayImage(np.zeros((0, 4), dtype=np.uint8))
        with pytest.raises(ValueError):
            GrayImage(np.zeros((2, 2, 3), dtype=np.uint8))
        with pytest.raises(ValueError):
            BinaryMask(np.zeros((4, 0), dtype=bool))

    def test_pixels_are_read_only(self):
        img = GrayImage(np.zeros((2, 2), dtype=np.uint8))
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 1
        mask = BinaryMask(np.zeros((2, 2), dtype=bool))
        with pytest.raises(ValueError):
            mask.bits[0, 0] = True

    def test_value_equality(self):
        a = GrayImage(np.arange(6, dtype=np.uint8).reshape(2, 3))
        b = GrayImage(np.arange(6, dtype=np.uint8).reshape(2, 3))
        c = GrayImage(np.zeros((2, 3), dtype=np.uint8))
        assert a == b and a != c
        assert a != "not an image"

    def test_containers_are_unhashable(self):
        with pytest.raises(TypeError):
            hash(GrayImage(np.zeros((2, 2), dtype=np.uint8)))

    def test_mask_count(self):
        m = BinaryMask(np.eye(4, dtype=bool))
        assert m.count() == 4


class TestPngIO:
    def test_gray_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        arr = rng.integers(0, 256, (17, 23), dtype=np.uint8)
        p = tmp_path / "img.png"
        save_gray_image(GrayImage(arr), str(p))
        assert np.array_equal(load_gray_image(str(p)).pixels, arr)

    def test_rgb_reads_red_channel(self, tmp_path):
        rgb = np.zeros((4, 4, 3), dtype=np.uint8)
        rgb[..., 0] = 200
        rgb[..., 1] = 10
        rgb[..., 2] = 99
        p = tmp_path / "rgb.png"
        write_png_rgb(p, rgb)
        assert np.all(load_gray_image(str(p)).pixels == 200)

    def test_mask_threshold_at_128(self, tmp_path):
        arr = np.array([[0, 127, 128, 255]], dtype=np.uint8)
        p = tmp_path / "m.png"
        write_png_gray(p, arr)
        assert load_mask(str(p)).bits.tolist() == [[False, False, True, True]]

    def test_mask_round_trip_is_exact(self, tmp_path):
        rng = np.random.default_rng(1)
        bits = rng.random((9, 13)) < 0.4
        p = tmp_path / "m.png"
        save_mask(BinaryMask(bits), str(p))
        assert np.array_equal(load_mask(str(p)).bits, bits)
        # saved foreground must be exactly 255, background 0
        raw = np.asarray(Image.open(p))
        assert set(np.unique(raw)) <= {0, 255}

    def test_missing_file_raises_builtin(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_gray_image(str(tmp_path / "nope.png"))

    def test_non_png_rejected(self, tmp_path):
        p = tmp_path / "img.bmp"
        Image.fromarray(np.zeros((4, 4), dtype=np.uint8)).save(p, format="BMP")
        with pytest.raises(UnsupportedImageError):
            load_gray_image(str(p))

    def test_palette_png_rejected(self, tmp_path):
        p = tmp_path / "pal.png"
        Image.fromarray(np.zeros((4, 4), dtype=np.uint8)).convert("P").save(p, format="PNG")
        with pytest.raises(UnsupportedImageError):
            load_gray_image(str(p))

    def test_16bit_png_rejected(self, tmp_path):
        p = tmp_path / "deep.png"
        Image.fromarray(np.zeros((4, 4), dtype=np.uint16)).save(p, format="PNG")
        with pytest.raises(UnsupportedImageError):
            load_gray_image(str(p))

    def test_rgb_png_rejected_as_mask(self, tmp_path):
        p = tmp_path / "rgb.png"
        write_png_rgb(p, np.zeros((4, 4, 3), dtype=np.uint8))
        with pytest.raises(UnsupportedImageError):
            load_mask(str(p))

    def test_corrupt_file_rejected(self, tmp_path):
        p = tmp_path / "junk.png"
        p.write_bytes(b"definitely not a png")
        with pytest.raises(CorruptImageError):
            load_gray_image(str(p))

    def test_truncated_png_rejected(self, tmp_path):
        p = tmp_path / "trunc.png"
        write_png_gray(p, np.random.default_rng(2).integers(0, 256, (64, 64), dtype=np.uint8))
        blob = p.read_bytes()
        p.write_bytes(blob[: len(blob) // 2])
        with pytest.raises(CorruptImageError):
            load_gray_image(str(p))


class TestResize:
    def test_identity(self):
        rng = np.random.default_rng(3)
        m = BinaryMask(rng.random((11, 7)) < 0.5)
        assert resize_mask_nn(m, 7, 11) == m

    def test_matches_index_formula(self):
        rng = np.random.default_rng(4)
        bits = rng.random((10, 15)) < 0.5
        out = resize_mask_nn(BinaryMask(bits), 40, 23)
        for y in range(23):
            for x in range(40):
                assert out.bits[y, x] == bits[(y * 10) // 23, (x * 15) // 40]

    def test_upscale_preserves_block_structure(self):
        bits = np.array([[True, False], [False, True]])
        out = resize_mask_nn(BinaryMask(bits), 4, 4)
        expect = np.repeat(np.repeat(bits, 2, axis=0), 2, axis=1)
        assert np.array_equal(out.bits, expect)

    def test_zero_target_rejected(self):
        m = BinaryMask(np.ones((2, 2), dtype=bool))
        with pytest.raises(ValueError):
            resize_mask_nn(m, 0, 5)

    @given(
        bits=hnp.arrays(np.bool_, hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=12)),
        w=st.integers(1, 20),
        h=st.integers(1, 20),
    )
    def test_output_shape_and_determinism(self, bits, w, h):
        m = BinaryMask(bits)
        a = resize_mask_nn(m, w, h)
        b = resize_mask_nn(m, w, h)
        assert a.bits.shape == (h, w)
        assert a == b


def test_require_same_shape():
    a = BinaryMask(np.ones((2, 3), dtype=bool))
    b = BinaryMask(np.ones((3, 2), dtype=bool))
    with pytest.raises(ShapeMismatchError):
        require_same_shape(a, b)
