"""Crops fixed-size network input patches out of frames.

A patch covers the box (optionally enlarged by `context_scale` around its
center) and is resampled bilinearly to PATCH_SIZE x PATCH_SIZE. Sample points
that fall outside the image read as zero; sample points inside the image are
interpolated from the nearest in-image pixels only, so a constant image
always produces a constant patch.
"""
import numpy as np
import torch
import torch.nn.functional as F

from model import architecture

# Subtracted from every pixel value before the patch enters the network.
PIXEL_MEAN = 128.0


class Error(Exception):
    pass


class BoxOutsideImageError(Error):
    pass


def extract_patches(image,
                    boxes,
                    context_scale=1.0,
                    patch_size=architecture.PATCH_SIZE,
                    mean=PIXEL_MEAN):
    """Crops many boxes out of one image in a single resampling pass.

    Args:
        image: An (H, W, C) numpy array.
        boxes: An (N, 4) array of (x, y, w, h) rows.
        context_scale: Factor by which each box is enlarged around its center
            before cropping.
        patch_size: Output side length in pixels.
        mean: Value subtracted from every output pixel.

    Returns:
        A float32 tensor of shape (N, C, patch_size, patch_size).

    Raises:
        BoxOutsideImageError: If any crop region does not overlap the image.
    """
    image = np.asarray(image)
    if image.ndim == 2:
        image = image[:, :, np.newaxis]
    height, width, channels = image.shape
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    n = len(boxes)
    if n == 0:
        return torch.zeros((0, channels, patch_size, patch_size))

    crop_w = boxes[:, 2] * context_scale
    crop_h = boxes[:, 3] * context_scale
    left = boxes[:, 0] + boxes[:, 2] / 2.0 - crop_w / 2.0
    top = boxes[:, 1] + boxes[:, 3] / 2.0 - crop_h / 2.0
    outside = ((left + crop_w <= 0) | (left >= width) | (top + crop_h <= 0) |
               (top >= height))
    if np.any(outside):
        raise BoxOutsideImageError(
            f'Crop region {boxes[np.argmax(outside)].tolist()} does not '
            f'overlap the {width}x{height} image.')

    # Continuous image coordinates of the output pixel centers.
    steps = (np.arange(patch_size) + 0.5) / patch_size
    xs = left[:, np.newaxis] + steps[np.newaxis, :] * crop_w[:, np.newaxis]
    ys = top[:, np.newaxis] + steps[np.newaxis, :] * crop_h[:, np.newaxis]

    # Stack all N crops vertically into one (N * P, P) sampling grid so that
    # the image is resampled once instead of being replicated N times.
    grid_x = np.broadcast_to(xs[:, np.newaxis, :], (n, patch_size, patch_size))
    grid_y = np.broadcast_to(ys[:, :, np.newaxis], (n, patch_size, patch_size))
    grid = np.stack([2.0 * grid_x / width - 1.0, 2.0 * grid_y / height - 1.0],
                    axis=-1).reshape(1, n * patch_size, patch_size, 2)

    source = torch.from_numpy(np.ascontiguousarray(image,
                                                   dtype=np.float32)).permute(
                                                       2, 0, 1).unsqueeze(0)
    sampled = F.grid_sample(source,
                            torch.from_numpy(grid.astype(np.float32)),
                            mode='bilinear',
                            padding_mode='border',
                            align_corners=False)
    patches = sampled.reshape(channels, n, patch_size,
                              patch_size).permute(1, 0, 2, 3)

    inside = ((grid_x >= 0) & (grid_x <= width) & (grid_y >= 0) &
              (grid_y <= height))
    mask = torch.from_numpy(inside.astype(np.float32)).unsqueeze(1)
    return ((patches - mean) * mask).contiguous()


def extract_patch(image,
                  box,
                  context_scale=1.0,
                  patch_size=architecture.PATCH_SIZE,
                  mean=PIXEL_MEAN):
    """Crops one BoundingBox; returns a (C, patch_size, patch_size) tensor."""
    return extract_patches(image, box.as_array()[np.newaxis], context_scale,
                           patch_size, mean)[0]
