// Client-side task state: the card list an annotator is editing.
//
// All mutations are local; nothing here talks to the network.  The card
// order is always a permutation of the task's references, and a card's
// category may be unset until submit time — submission is blocked until
// every card has one.

import type {
  ImpactCategory,
  SubmissionIssues,
  TaskReference,
  RankingItem,
} from "./types.js";
import { CATEGORIES } from "./types.js";

export type Card = {
  paperId: string;
  title: string;
  contexts: string[];
  category: ImpactCategory | null;
  contextsVisible: boolean;
};

export type Draft = {
  order: string[];
  categories: Record<string, ImpactCategory>;
};

export type IssueKind = keyof SubmissionIssues;

export class TaskModel {
  readonly taskId: string;
  private cards: Card[];

  constructor(taskId: string, references: TaskReference[]) {
    this.taskId = taskId;
    this.cards = references.map((ref) => ({
      paperId: ref.paperId,
      title: ref.title,
      contexts: [...ref.contexts],
      category: null,
      contextsVisible: false,
    }));
  }

  list(): readonly Card[] {
    return this.cards;
  }

  card(paperId: string): Card | undefined {
    return this.cards.find((card) => card.paperId === paperId);
  }

  /** Move the card at `from` so it sits at `to`; out-of-range is a no-op. */
  move(from: number, to: number): boolean {
    if (
      !Number.isInteger(from) ||
      !Number.isInteger(to) ||
      from < 0 ||
      from >= this.cards.length ||
      to < 0 ||
      to >= this.cards.length ||
      from === to
    ) {
      return false;
    }
    const [card] = this.cards.splice(from, 1);
    this.cards.splice(to, 0, card!);
    return true;
  }

  indexOf(paperId: string): number {
    return this.cards.findIndex((card) => card.paperId === paperId);
  }

  setCategory(paperId: string, category: ImpactCategory): boolean {
    const card = this.card(paperId);
    if (!card || !CATEGORIES.includes(category)) return false;
    card.category = category;
    return true;
  }

  toggleContexts(paperId: string): boolean {
    const card = this.card(paperId);
    if (!card) return false;
    card.contextsVisible = !card.contextsVisible;
    return card.contextsVisible;
  }

  /** Ids still lacking a category; empty means the ranking can be submitted. */
  missingCategories(): string[] {
    return this.cards
      .filter((card) => card.category === null)
      .map((card) => card.paperId);
  }

  /** Submission payload; only valid once missingCategories() is empty. */
  ranking(): RankingItem[] {
    return this.cards.map((card) => ({
      paperId: card.paperId,
      category: card.category ?? "",
    }));
  }

  // --- drafts -------------------------------------------------------------

  toDraft(): Draft {
    const categories: Record<string, ImpactCategory> = {};
    for (const card of this.cards) {
      if (card.category !== null) categories[card.paperId] = card.category;
    }
    return { order: this.cards.map((card) => card.paperId), categories };
  }

  /**
   * Restore order and categories from a saved draft.  The draft is only
   * applied when its id set matches the task's references exactly —
   * anything stale (task changed server-side) is ignored.
   */
  restoreDraft(draft: Draft): boolean {
    const current = new Set(this.cards.map((card) => card.paperId));
    if (
      !Array.isArray(draft.order) ||
      draft.order.length !== current.size ||
      !draft.order.every((id) => current.has(id)) ||
      new Set(draft.order).size !== draft.order.length
    ) {
      return false;
    }
    const byId = new Map(this.cards.map((card) => [card.paperId, card]));
    this.cards = draft.order.map((id) => byId.get(id)!);
    for (const [id, category] of Object.entries(draft.categories ?? {})) {
      if (byId.has(id) && CATEGORIES.includes(category)) {
        byId.get(id)!.category = category;
      }
    }
    return true;
  }
}

/** Flatten a 422 body into per-card issue labels for inline display. */
export function issuesByCard(issues: SubmissionIssues): Map<string, IssueKind[]> {
  const byCard = new Map<string, IssueKind[]>();
  const kinds: IssueKind[] = ["missing", "duplicates", "unknown", "invalid_category"];
  for (const kind of kinds) {
    for (const id of issues[kind] ?? []) {
      const existing = byCard.get(id) ?? [];
      existing.push(kind);
      byCard.set(id, existing);
    }
  }
  return byCard;
}
