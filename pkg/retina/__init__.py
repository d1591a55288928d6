"""Retinal image quality improvement, texture features and classifiers for glaucoma screening."""
