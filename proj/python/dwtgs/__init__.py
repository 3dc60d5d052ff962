"""Wavelet-regularized 2D Gaussian splatting.

Images are float64 arrays shaped (C, H, W) or (H, W).
"""

from ._core import (
    DwtgsError,
    dssim_loss,
    dwt_forward,
    dwt_inverse,
    fft2,
    highpass_mask,
    ifft2,
    init_scene,
    l1_loss,
    loss_dwtgs_hf,
    loss_dwtgs_lf,
    loss_dwtgs_sup_hf,
    loss_fregs,
    lowpass_mask,
    progressive_hp_mask,
    psnr,
    read_image,
    render,
    render_backward,
    ssim,
    train,
    write_image,
)

__all__ = [
    "DwtgsError",
    "dssim_loss",
    "dwt_forward",
    "dwt_inverse",
    "fft2",
    "highpass_mask",
    "ifft2",
    "init_scene",
    "l1_loss",
    "loss_dwtgs_hf",
    "loss_dwtgs_lf",
    "loss_dwtgs_sup_hf",
    "loss_fregs",
    "lowpass_mask",
    "progressive_hp_mask",
    "psnr",
    "read_image",
    "render",
    "render_backward",
    "ssim",
    "train",
    "write_image",
]
