"""Convert the Cleveland heart-disease table (Orange3 `heart_disease.tab`)
into the numeric 14-column CSV layout used by `data/heart.csv`.

Category codes follow the widely distributed Kaggle "heart-disease-uci" file:
cp 0..3, restecg 0..2, slope 0..2, ca 0..4 (4 = missing), thal 0..3
(0 = missing), target 1 = no disease.

Usage: python3 scripts/cleveland_to_csv.py heart_disease.tab > data/heart.csv
"""
import csv
import sys

CP = {"asymptomatic": 0, "atypical ang": 1, "non-anginal": 2, "typical ang": 3}
RESTECG = {"left vent hypertrophy": 0, "normal": 1, "ST-T abnormal": 2}
SLOPE = {"downsloping": 0, "flat": 1, "upsloping": 2}
THAL = {"?": 0, "fixed defect": 1, "normal": 2, "reversable defect": 3}
SEX = {"female": 0, "male": 1}


def num(v):
    f = float(v)
    return str(int(f)) if f.is_integer() else repr(f)


def main(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh, delimiter="\t"))[3:]
    out = csv.writer(sys.stdout, lineterminator="\n")
    out.writerow("age,sex,cp,trestbps,chol,fbs,restecg,thalach,exang,oldpeak,slope,ca,thal,target".split(","))
    for r in rows:
        if not r:
            continue
        age, sex, cp, bp, chol, fbs, ecg, hr, ang, oldpeak, slope, ca, thal, cls = r
        out.writerow([
            num(age), SEX[sex], CP[cp], num(bp), num(chol), fbs, RESTECG[ecg], num(hr), ang,
            num(oldpeak), SLOPE[slope], 4 if ca == "?" else num(ca), THAL[thal], 1 - int(cls),
        ])


if __name__ == "__main__":
    main(sys.argv[1])
