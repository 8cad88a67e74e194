"""Group-type prediction: sociality score, tree ensemble, evaluation."""
