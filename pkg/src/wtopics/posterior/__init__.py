"""Label-switching repair, summaries, clustering and topic-count selection."""

from .relabel import TopicDraws, l1_to_reference, mou_topic_draws, relabel
from .selection import select_num_topics
from .summary import (
    ClusterAssignment,
    TopicSummary,
    assign_documents,
    assign_documents_by_vote,
    assignments_frame,
    summarize,
    topics_frame,
)

__all__ = [
    "ClusterAssignment",
    "TopicDraws",
    "TopicSummary",
    "assign_documents",
    "assign_documents_by_vote",
    "assignments_frame",
    "l1_to_reference",
    "mou_topic_draws",
    "relabel",
    "select_num_topics",
    "summarize",
    "topics_frame",
]
