// Unsubmitted work persisted per task in localStorage, so a reload (or a
// browser crash) before submit loses nothing.  Storage failures are
// swallowed: a draft is a convenience, never a requirement.

import type { Draft } from "./model.js";

export type StorageLike = {
  getItem(key: string): string | null;
  setItem(key: string, value: string): void;
  removeItem(key: string): void;
};

const KEY_PREFIX = "annotation-draft:";
const VERSION = 1;

export class DraftStore {
  constructor(private readonly storage: StorageLike) {}

  private key(taskId: string): string {
    return `${KEY_PREFIX}${taskId}`;
  }

  save(taskId: string, draft: Draft): void {
    try {
      this.storage.setItem(
        this.key(taskId),
        JSON.stringify({ version: VERSION, draft }),
      );
    } catch {
      // quota exceeded or storage disabled; drafts are best-effort
    }
  }

  load(taskId: string): Draft | null {
    try {
      const raw = this.storage.getItem(this.key(taskId));
      if (raw === null) return null;
      const parsed = JSON.parse(raw) as { version?: number; draft?: Draft };
      if (parsed.version !== VERSION || !parsed.draft) return null;
      return parsed.draft;
    } catch {
      return null;
    }
  }

  clear(taskId: string): void {
    try {
      this.storage.removeItem(this.key(taskId));
    } catch {
      // nothing to do
    }
  }
}

/** The real localStorage when usable, otherwise an in-memory stand-in. */
export function defaultStorage(): StorageLike {
  try {
    const probe = "__annotation_probe__";
    window.localStorage.setItem(probe, "1");
    window.localStorage.removeItem(probe);
    return window.localStorage;
  } catch {
    const memory = new Map<string, string>();
    return {
      getItem: (key) => memory.get(key) ?? null,
      setItem: (key, value) => void memory.set(key, value),
      removeItem: (key) => void memory.delete(key),
    };
  }
}
