"""Toy encoder-decoder segmentation network for iris masks.

Trains on an images/ + masks/ dataset directory and emits binary mask
PNGs (0/255 grayscale, threshold 128) that downstream mask-consuming
pipelines read directly.
"""

from .data import load_dataset, resize_mask_nn, save_mask
from .infer import infer_dir, infer_file, load_model, predict_mask, smooth_mask
from .model import ToySegNet
from .train import TrainConfig, train

__version__ = "0.1.0"
