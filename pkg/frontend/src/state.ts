import type { ScenarioRequest, ScenarioResult } from './types.js'

/** One completed what-if run, kept for side-by-side comparison. */
export interface RunRecord {
  id: string
  modelId: string
  request: ScenarioRequest
  result: ScenarioResult
  at: string
}

const STORAGE_PREFIX = 'policyscope.runs.'

function storageKey(modelId: string): string {
  return STORAGE_PREFIX + modelId
}

/** Run history persisted in browser storage, keyed by model id. */
export class RunHistory {
  constructor(private storage: Storage = window.localStorage) {}

  list(modelId: string): RunRecord[] {
    const raw = this.storage.getItem(storageKey(modelId))
    if (!raw) return []
    try {
      return JSON.parse(raw) as RunRecord[]
    } catch {
      return []
    }
  }

  add(record: RunRecord): RunRecord[] {
    const runs = this.list(record.modelId)
    runs.push(record)
    this.storage.setItem(storageKey(record.modelId), JSON.stringify(runs))
    return runs
  }

  clear(modelId: string): void {
    this.storage.removeItem(storageKey(modelId))
  }
}

let counter = 0

export function runId(): string {
  counter += 1
  return `run-${Date.now()}-${counter}`
}
