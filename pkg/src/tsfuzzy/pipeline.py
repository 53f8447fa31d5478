"""Identification workflow: center, cluster, optionally reduce, build the model."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .clustering import ClusteringConfig, ClusteringResult, cluster, to_ts_model
from .dataio import Dataset, mean_center
from .errors import ConfigurationError
from .model import TSModel
from .selection import ConsequentRanking, FisherTrace, rank_antecedents, rank_consequents


@dataclass(frozen=True)
class PipelineConfig:
    clustering: ClusteringConfig = field(default_factory=ClusteringConfig)
    antecedent_keep: Optional[int] = None
    consequent_keep: Optional[int] = None
    unit_weights: bool = False

    def with_seed(self, seed: int) -> "PipelineConfig":
        return replace(self, clustering=replace(self.clustering, seed=int(seed)))

    def check(self, k: int) -> None:
        for name, keep in (("antecedent", self.antecedent_keep), ("consequent", self.consequent_keep)):
            if keep is not None and not 1 <= keep <= k:
                raise ConfigurationError(f"{name} keep count {keep} outside [1, {k}]")


@dataclass(frozen=True)
class PipelineFit:
    model: TSModel
    clustering: ClusteringResult
    full_clustering: ClusteringResult
    consequent_ranking: Optional[ConsequentRanking] = None
    fisher_trace: Optional[FisherTrace] = None

    @property
    def reduced(self) -> bool:
        return self.clustering is not self.full_clustering


def fit(dataset: Dataset, config: PipelineConfig) -> PipelineFit:
    """Fit a model on a raw (uncentered) dataset.

    All descriptors start as both antecedents and consequents.  When keep
    counts are given, consequents are ranked by error-reduction ratio and
    antecedents eliminated by interclass separability, both on the
    all-column clustering, and the model is re-clustered on the kept columns.
    """
    config.check(dataset.k)
    centered = mean_center(dataset.raw())
    Z = centered.as_matrix()
    everything = tuple(range(dataset.k))
    full = cluster(Z, config.clustering, everything, everything)

    ranking = trace = None
    ante, cons = everything, everything
    if config.consequent_keep is not None:
        priors = np.array([p.prior for p in full.prototypes])
        ranking = rank_consequents(Z, full.partition, priors, everything, config.clustering.fuzziness)
        cons = tuple(sorted(ranking.aggregate_order[: config.consequent_keep]))
    if config.antecedent_keep is not None:
        trace = rank_antecedents(full.prototypes, config.antecedent_keep)
        ante = tuple(sorted(trace.kept))

    final = full
    if (ante, cons) != (everything, everything):
        final = cluster(Z, config.clustering, ante, cons)

    model = to_ts_model(final, centered.column_means, centered.activity_mean, dataset.column_names)
    if config.unit_weights:
        model = model.with_unit_weights()
    return PipelineFit(model, final, full, ranking, trace)
