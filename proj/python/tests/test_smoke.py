"""End-to-end smoke tests for the python bindings on a tiny configuration."""

import math

import pytest

import maxrf


def tiny_model():
    m = maxrf.ModelConfig()
    m.n_channels = 64
    m.patch_size = 16
    m.embed_dim = 16
    m.encoder_depth = 1
    m.encoder_heads = 2
    m.decoder_dim = 16
    m.decoder_depth = 1
    m.decoder_heads = 2
    m.mlp_ratio = 2.0
    return m


def tiny_corpus():
    sc = maxrf.SyntheticConfig()
    sc.n_channels = 64
    sc.min_sigma = 2.0
    sc.max_sigma = 6.0
    sc.noise_std = 1.0
    sc.target_peak_center = 32
    sc.target_peak_sigma = 5.0
    return sc


def test_transforms_and_masking():
    x = [1.0, 2.0, 3.0, 4.0]
    z = maxrf.instance_normalize(x)
    assert abs(sum(z)) < 1e-12
    assert maxrf.log_transform([0.0])[0] == 0.0

    plan = maxrf.sample_mask(128, 0.5, seed=7)
    assert len(plan.masked_indices) == 64
    assert len(plan.kept_indices) == 64
    assert sorted(plan.masked_indices) == list(plan.masked_indices)
    again = maxrf.sample_mask(128, 0.5, seed=7)
    assert list(again.masked_indices) == list(plan.masked_indices)


def test_synthetic_corpus_is_deterministic():
    sc = tiny_corpus()
    a = maxrf.synth_spectra(4, 11, sc)
    b = maxrf.synth_spectra(4, 11, sc)
    assert [s.record_id for s in a] == [s.record_id for s in b]
    assert a[0].channels == b[0].channels
    labels = maxrf.synth_labels(4, 11, maxrf.Task.CaCO3, sc)
    assert [l.record_id for l in labels] == [s.record_id for s in a]
    assert all(0.0 <= l.value_wt_pct <= 100.0 for l in labels)


def test_pretrain_finetune_evaluate_saliency(tmp_path):
    sc = tiny_corpus()
    train = maxrf.synth_spectra(16, 1, sc)
    val = maxrf.synth_spectra(8, 2, sc)
    m = tiny_model()

    t = maxrf.TrainConfig()
    t.epochs = 3
    t.batch_size = 8
    t.base_lr = 1e-3
    t.warmup_epochs = 1
    t.weight_decay = 0.0
    t.seed = 5
    t.mask_ratio = 0.5
    best, final, metrics = maxrf.pretrain(train, val, m, t)
    assert best.parameter_count() > 0
    assert any(r.split == "val" for r in metrics)

    path = str(tmp_path / "pre.ckpt")
    maxrf.save_checkpoint(best, path)
    loaded = maxrf.load_checkpoint(path)
    assert loaded.parameter_count() == best.parameter_count()

    labels = maxrf.synth_labels(16, 1, maxrf.Task.CaCO3, sc)
    val_labels = maxrf.synth_labels(8, 2, maxrf.Task.CaCO3, sc)
    ft = maxrf.TrainConfig()
    ft.epochs = 3
    ft.batch_size = 8
    ft.base_lr = 1e-4
    ft.warmup_epochs = 1
    ft.weight_decay = 0.0
    ft.seed = 6
    ft.mask_ratio = 0.0
    ft_best, _, _ = maxrf.finetune(
        loaded, train, labels, val, val_labels, maxrf.Task.CaCO3, m, ft
    )
    assert ft_best.task == "CaCO3"

    report = maxrf.evaluate_regression(ft_best, val, val_labels, maxrf.Task.CaCO3)
    assert report.n == 8
    assert math.isfinite(report.r2) and report.rmse >= 0.0

    recon = maxrf.evaluate_reconstruction(best, val, 0.5, 9)
    assert math.isfinite(recon.r2)

    s = maxrf.saliency_map(ft_best, val, val_labels, maxrf.Task.CaCO3)
    assert s.values.shape == (64,)
    assert s.batch_size == 8
    assert (s.values >= 0.0).all()
    assert abs(s.energy_axis_kev[0] - maxrf.channel_to_energy(0, 64)) < 1e-12


def test_error_mapping(tmp_path):
    with pytest.raises(ValueError):
        maxrf.load_spectra(str(tmp_path / "missing.csv"))
    with pytest.raises(ValueError):
        maxrf.sample_mask(128, 1.5, seed=1)
    assert maxrf.r_squared([1.0, 2.0], [1.0, 2.0]) == 1.0
    with pytest.raises(ValueError):
        maxrf.r_squared([1.0], [1.0, 2.0])
