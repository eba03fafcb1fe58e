import type { Api } from './api.js'
import type { JobSummary } from './types.js'

export const JOB_POLL_INTERVAL_MS = 2000

/** Poll a training job every 2s until it reaches a terminal state. */
export function pollJob(
  api: Api,
  jobId: string,
  onUpdate: (job: JobSummary) => void,
  intervalMs: number = JOB_POLL_INTERVAL_MS,
): { stop: () => void; done: Promise<JobSummary> } {
  let timer: ReturnType<typeof setTimeout> | null = null
  let stopped = false
  const done = new Promise<JobSummary>((resolve, reject) => {
    const tick = async () => {
      if (stopped) return
      try {
        const job = await api.job(jobId)
        if (stopped) return
        onUpdate(job)
        if (job.status === 'done' || job.status === 'failed') {
          resolve(job)
          return
        }
      } catch (err) {
        reject(err)
        return
      }
      timer = setTimeout(tick, intervalMs)
    }
    void tick()
  })
  return {
    stop: () => {
      stopped = true
      if (timer) clearTimeout(timer)
    },
    done,
  }
}

/**
 * Guards one in-flight request per card: responses arriving after a newer
 * request started are discarded.
 */
export class RequestToken {
  private current = 0

  next(): number {
    return ++this.current
  }

  isStale(token: number): boolean {
    return token !== this.current
  }
}
