// Auditory cues: short synthesized tones (no recorded speech in scope).

export class CuePlayer {
  private ctx: AudioContext | null = null;

  private ensure(): AudioContext | null {
    if (typeof AudioContext === "undefined") return null;
    if (!this.ctx) this.ctx = new AudioContext();
    return this.ctx;
  }

  // One two-note chirp per stimulus; pitch varies by station so cues are
  // distinguishable without looking.
  play(task: string): void {
    const ctx = this.ensure();
    if (!ctx) return;
    const base = { tracking: 660, sysmon: 880, resman: 520, comms: 740 }[task] ?? 700;
    const t0 = ctx.currentTime;
    for (const [offset, freq] of [
      [0, base],
      [0.12, base * 1.25],
    ] as const) {
      const osc = ctx.createOscillator();
      const gain = ctx.createGain();
      osc.frequency.value = freq;
      osc.type = "sine";
      gain.gain.setValueAtTime(0.0001, t0 + offset);
      gain.gain.exponentialRampToValueAtTime(0.2, t0 + offset + 0.02);
      gain.gain.exponentialRampToValueAtTime(0.0001, t0 + offset + 0.1);
      osc.connect(gain).connect(ctx.destination);
      osc.start(t0 + offset);
      osc.stop(t0 + offset + 0.12);
    }
  }
}
