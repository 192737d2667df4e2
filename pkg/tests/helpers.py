from riskrank.situation import Situation

DIMS = ("Location", "Time", "Social")


def sit(loc, time, social, risk=None):
    return Situation.of({"Location": loc, "Time": time, "Social": social}, DIMS, risk)
