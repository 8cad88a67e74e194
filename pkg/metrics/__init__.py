"""Group sociality and topicality metrics."""
