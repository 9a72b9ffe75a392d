import numpy as np
import pytest

from dfrf.core import (
    BG,
    FG,
    UNLABELED,
    DfrfConfig,
    ImageObservation,
    LabelField,
    SeedMask,
    validate_inputs,
)
from dfrf.errors import DecodeError, DimensionMismatch, MissingSeedClass


def test_minimal_valid_input_passes():
    image = ImageObservation(np.zeros((2, 2, 3)))
    states = np.array([[FG, UNLABELED], [UNLABELED, BG]], dtype=np.uint8)
    validate_inputs(image, SeedMask(states))


def test_dimension_mismatch_rejected():
    image = ImageObservation(np.zeros((2, 2, 3)))
    seeds = SeedMask(np.zeros((3, 3), dtype=np.uint8))
    with pytest.raises(DimensionMismatch):
        validate_inputs(image, seeds)


def test_missing_seed_class_named():
    image = ImageObservation(np.zeros((2, 2, 3)))
    only_bg = np.full((2, 2), BG, dtype=np.uint8)
    with pytest.raises(MissingSeedClass) as info:
        validate_inputs(image, SeedMask(only_bg))
    assert info.value.seed_class == "FG"
    only_fg = np.full((2, 2), FG, dtype=np.uint8)
    with pytest.raises(MissingSeedClass) as info:
        validate_inputs(image, SeedMask(only_fg))
    assert info.value.seed_class == "BG"


def test_channel_range_enforced():
    with pytest.raises(ValueError):
        ImageObservation(np.full((2, 2, 3), 1.5))
    with pytest.raises(DimensionMismatch):
        ImageObservation(np.zeros((0, 2, 3)))


def test_uint8_round_trip_exact():
    rng = np.random.default_rng(0)
    source = rng.integers(0, 256, (11, 7, 3)).astype(np.uint8)
    image = ImageObservation.from_uint8(source)
    assert image.pixels.min() >= 0.0 and image.pixels.max() <= 1.0
    np.testing.assert_array_equal(image.to_uint8(), source)


def test_png_round_trip_exact():
    rng = np.random.default_rng(1)
    source = rng.integers(0, 256, (9, 13, 3)).astype(np.uint8)
    image = ImageObservation.from_uint8(source)
    again = ImageObservation.from_png(image.to_png())
    np.testing.assert_array_equal(again.to_uint8(), source)


def test_corrupt_png_raises_decode_error():
    with pytest.raises(DecodeError):
        ImageObservation.from_png(b"not a png at all")


def test_seed_mask_color_convention():
    rgb = np.zeros((2, 3, 3), dtype=np.uint8)
    rgb[0, 0] = (255, 0, 0)  # FG
    rgb[0, 1] = (0, 0, 255)  # BG
    rgb[0, 2] = (255, 0, 255)  # neither: unlabeled
    rgb[1, 0] = (254, 0, 0)  # off-red: unlabeled
    mask = SeedMask.from_png(ImageObservation.from_uint8(rgb).to_png())
    assert mask.states[0, 0] == FG
    assert mask.states[0, 1] == BG
    assert mask.states[0, 2] == UNLABELED
    assert mask.states[1, 0] == UNLABELED
    again = SeedMask.from_png(mask.to_png())
    np.testing.assert_array_equal(again.states, mask.states)


def test_label_field_binary_and_png_round_trip():
    with pytest.raises(ValueError):
        LabelField(np.array([[0, 2]], dtype=np.uint8))
    labels = LabelField(np.array([[0, 1], [1, 0]], dtype=np.uint8))
    again = LabelField.from_png(labels.to_png())
    np.testing.assert_array_equal(again.labels, labels.labels)


def test_types_are_immutable():
    image = ImageObservation(np.zeros((2, 2, 3)))
    with pytest.raises(ValueError):
        image.pixels[0, 0, 0] = 1.0
    labels = LabelField(np.zeros((2, 2), dtype=np.uint8))
    with pytest.raises(ValueError):
        labels.labels[0, 0] = 1


def test_config_defaults_and_validation():
    config = DfrfConfig()
    assert config.n_layers == 15
    assert config.nev_start == 450
    assert config.nev_step == 15
    assert config.layer_nodes()[0] == 450
    assert config.layer_nodes()[-1] == 660
    desk = DfrfConfig.desk()
    assert desk.layer_nodes() == [60, 80, 100, 120, 140]
    with pytest.raises(ValueError):
        DfrfConfig(n_layers=-1)
    with pytest.raises(ValueError):
        DfrfConfig(alpha=1.5)
    with pytest.raises(ValueError):
        DfrfConfig(top_k=0)
    with pytest.raises(ValueError):
        DfrfConfig(nev_start=0)
